//! Descent, dual extraction and construction chained end to end.

use serde::{Deserialize, Serialize};

use crate::construct::{construct_output, ConstructionTrace};
use crate::descent::{run_descent, SolverConfig, StationaryCertificate};
use crate::dual::{compute_lambda_mu, solve_dual, ConstructParams, DualSolution};
use crate::error::Result;
use crate::game::{BimatrixGame, StrategyProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub certificate: StationaryCertificate,
    pub duals: DualSolution,
    pub params: ConstructParams,
    pub trace: ConstructionTrace,
}

impl Solution {
    pub fn profile(&self) -> &StrategyProfile {
        &self.trace.chosen().profile
    }
}

/// Solves from the uniform profile.
pub fn solve(game: &BimatrixGame, config: &SolverConfig) -> Result<Solution> {
    solve_from(game, config, &StrategyProfile::uniform(game.n()))
}

pub fn solve_from(
    game: &BimatrixGame,
    config: &SolverConfig,
    initial: &StrategyProfile,
) -> Result<Solution> {
    let certificate = run_descent(game, config, initial)?;
    let duals = solve_dual(game, &certificate.profile, config.br_tol)?;
    let params = compute_lambda_mu(game, &certificate.profile, &duals)?;
    let trace = construct_output(game, &certificate, &duals, &params, config)?;
    Ok(Solution {
        certificate,
        duals,
        params,
        trace,
    })
}
