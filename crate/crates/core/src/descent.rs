//! Descent on the maximum regret `g(x, y) = max(reg_r, reg_c)` until the
//! direction LP certifies a δ-stationary point.
//!
//! Each iteration equalizes the two regrets, solves the direction LP over
//! `(γ, x', y')`, and either stops (`γ - g >= -δ`) or moves both strategies
//! toward `(x', y')` with weight `δ / (δ + 2)`.

use log::{debug, trace};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{mix, BimatrixGame, MixedStrategy, Player, StrategyProfile, BR_TOL};
use crate::lp::{self, LinearProgram, Relation, Sense, LP_FEAS_TOL};

/// Maximum allowed gap between the two regrets after equalization.
pub const EQUALIZE_TOL: f64 = 1e-6;

pub const DEFAULT_DELTA: f64 = 0.005;

/// Hard cap on the default iteration budget.
pub const MAX_ITERATIONS_CAP: usize = 200_000;

/// Halvings tried when the fixed step fails to lower `g`.
const MAX_BACKTRACKS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub delta: f64,
    pub max_iterations: usize,
    pub br_tol: f64,
    pub lp_feas_tol: f64,
    /// Only consumed by instance generators.
    pub rng_seed: u64,
    /// Stop descending as soon as `g <= 1/3 + δ`.
    pub fast_mode: bool,
}

impl SolverConfig {
    pub fn new(delta: f64) -> Result<Self> {
        let cfg = Self {
            delta,
            max_iterations: Self::default_max_iterations(delta),
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `ceil(40 / δ²)`, capped at [`MAX_ITERATIONS_CAP`].
    pub fn default_max_iterations(delta: f64) -> usize {
        if !(delta > 0.0) {
            return MAX_ITERATIONS_CAP;
        }
        let raw = (40.0 / (delta * delta)).ceil();
        if raw >= MAX_ITERATIONS_CAP as f64 {
            MAX_ITERATIONS_CAP
        } else {
            raw as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0 / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1/3), got {}",
                self.delta
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        if !(self.br_tol >= 0.0) || !(self.lp_feas_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be >= 0".into()));
        }
        Ok(())
    }

    /// Step weight `δ / (δ + 2)` placed on the LP direction.
    pub fn step_weight(&self) -> f64 {
        self.delta / (self.delta + 2.0)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        let delta = DEFAULT_DELTA;
        Self {
            delta,
            max_iterations: Self::default_max_iterations(delta),
            br_tol: BR_TOL,
            lp_feas_tol: LP_FEAS_TOL,
            rng_seed: 0,
            fast_mode: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalSolution {
    pub gamma: f64,
    pub x_prime: MixedStrategy,
    pub y_prime: MixedStrategy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// `γ - g >= -δ` held.
    Stationary,
    /// Fast mode stopped once `g <= 1/3 + δ`.
    EarlyExit,
    IterationCap,
    /// No step length along the LP direction lowered `g`.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryCertificate {
    pub profile: StrategyProfile,
    pub gamma: f64,
    pub g_value: f64,
    pub iterations_used: usize,
    /// `g` after equalization, one entry per iteration.
    pub descent_trace: Vec<f64>,
    pub termination: Termination,
    /// Iterations whose fixed step had to be shortened.
    pub backtracked_steps: usize,
}

impl StationaryCertificate {
    pub fn is_stationary(&self) -> bool {
        self.termination == Termination::Stationary
    }
}

/// Equalizes the two regrets by re-solving the strategy of the player with the
/// larger regret, never increasing the maximum regret.
pub fn equalize_regrets(game: &BimatrixGame, profile: &StrategyProfile) -> Result<StrategyProfile> {
    let rep = game.regret_report(profile)?;
    let gap = rep.row_regret - rep.col_regret;
    if gap.abs() <= 1e-12 {
        return Ok(profile.clone());
    }

    let n = game.n();
    let mover = if gap >= 0.0 { Player::Row } else { Player::Col };
    // For the row player, with y fixed: maximize x.(Ry) subject to
    // x.(C e_j - Cy + Ry) <= max(Ry) for every column j. The column case is
    // the same program on the transposed payoffs.
    let (own, opp_fixed, own_br) = match mover {
        Player::Row => {
            let ry = game.row_pure_payoffs(profile.col.probs());
            let cy = game.col_payoffs_by_row(profile.col.probs());
            (ry, cy, rep.row_br_payoff)
        }
        Player::Col => {
            let xc = game.col_pure_payoffs(profile.row.probs());
            let xr = game.row_payoffs_by_column(profile.row.probs());
            (xc, xr, rep.col_br_payoff)
        }
    };

    let mut prog = LinearProgram::new(Sense::Maximize, own.clone());
    for other in 0..n {
        let coeffs = (0..n)
            .map(|k| {
                let opp_pure = match mover {
                    Player::Row => game.c(k, other),
                    Player::Col => game.r(other, k),
                };
                opp_pure - opp_fixed[k] + own[k]
            })
            .collect();
        prog.add_constraint(coeffs, Relation::Le, own_br);
    }
    prog.add_constraint(vec![1.0; n], Relation::Eq, 1.0);

    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::Internal(format!(
            "regret equalization LP returned {:?}",
            sol.status
        )));
    }
    let moved = MixedStrategy::project(sol.primal_values)?;
    let out = match mover {
        Player::Row => StrategyProfile::new(moved, profile.col.clone())?,
        Player::Col => StrategyProfile::new(profile.row.clone(), moved)?,
    };

    let after = game.regret_report(&out)?;
    if (after.row_regret - after.col_regret).abs() > EQUALIZE_TOL
        || after.max_regret > rep.max_regret + 1e-9
    {
        return Err(Error::InvariantViolation(format!(
            "equalization left regrets ({}, {}) from ({}, {})",
            after.row_regret, after.col_regret, rep.row_regret, rep.col_regret
        )));
    }
    Ok(out)
}

/// The direction LP at `(x, y)`.
///
/// Variables are laid out as `[γ, x'_0..x'_n, y'_0..y'_n]` with `γ` free.
/// Rows: one per `i ∈ B_r(y)`, then one per `j ∈ B_c(x)`, then the two
/// simplex equalities.
pub fn build_primal_lp(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    br_tol: f64,
) -> Result<LinearProgram> {
    let n = game.n();
    let (x, y) = (profile.row.probs(), profile.col.probs());
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.len().max(y.len()),
        });
    }
    let row_br = game.best_response_set(Player::Row, &profile.col, br_tol)?;
    let col_br = game.best_response_set(Player::Col, &profile.row, br_tol)?;
    if row_br.is_empty() || col_br.is_empty() {
        return Err(Error::Internal("empty best-response set".into()));
    }

    let ry = game.row_pure_payoffs(y); // R(e_k, y)
    let xr = game.row_payoffs_by_column(x); // R(x, e_l)
    let cy = game.col_payoffs_by_row(y); // C(e_k, y)
    let xc = game.col_pure_payoffs(x); // C(x, e_l)
    let rxy = game.row_value(x, y);
    let cxy = game.col_value(x, y);

    let width = 1 + 2 * n;
    let mut objective = vec![0.0; width];
    objective[0] = 1.0;
    let mut prog = LinearProgram::new(Sense::Minimize, objective);
    prog.set_free(0);

    // γ >= R(e_i, y') - R(x, y') - R(x', y) + R(x, y)
    for &i in &row_br.indices {
        let mut a = vec![0.0; width];
        a[0] = 1.0;
        for k in 0..n {
            a[1 + k] = ry[k];
            a[1 + n + k] = -(game.r(i, k) - xr[k]);
        }
        prog.add_constraint(a, Relation::Ge, rxy);
    }
    // γ >= C(x', e_j) - C(x', y) - C(x, y') + C(x, y)
    for &j in &col_br.indices {
        let mut a = vec![0.0; width];
        a[0] = 1.0;
        for k in 0..n {
            a[1 + k] = -(game.c(k, j) - cy[k]);
            a[1 + n + k] = xc[k];
        }
        prog.add_constraint(a, Relation::Ge, cxy);
    }
    let mut sx = vec![0.0; width];
    sx[1..=n].iter_mut().for_each(|v| *v = 1.0);
    prog.add_constraint(sx, Relation::Eq, 1.0);
    let mut sy = vec![0.0; width];
    sy[1 + n..].iter_mut().for_each(|v| *v = 1.0);
    prog.add_constraint(sy, Relation::Eq, 1.0);
    Ok(prog)
}

pub fn solve_primal(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    br_tol: f64,
) -> Result<PrimalSolution> {
    let n = game.n();
    let prog = build_primal_lp(game, profile, br_tol)?;
    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::Internal(format!(
            "direction LP returned {:?}",
            sol.status
        )));
    }
    let v = sol.primal_values;
    Ok(PrimalSolution {
        gamma: v[0],
        x_prime: MixedStrategy::project(v[1..=n].to_vec())?,
        y_prime: MixedStrategy::project(v[1 + n..].to_vec())?,
    })
}

/// Moves both strategies toward the LP direction with weight `δ / (δ + 2)`.
pub fn descent_step(
    profile: &StrategyProfile,
    primal: &PrimalSolution,
    delta: f64,
) -> Result<StrategyProfile> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} must be >= 0"
        )));
    }
    step_with_weight(profile, primal, delta / (delta + 2.0))
}

fn step_with_weight(
    profile: &StrategyProfile,
    primal: &PrimalSolution,
    weight: f64,
) -> Result<StrategyProfile> {
    StrategyProfile::new(
        mix(&primal.x_prime, &profile.row, weight)?,
        mix(&primal.y_prime, &profile.col, weight)?,
    )
}

/// Runs the descent from `initial` until a δ-stationary point is certified
/// or the iteration budget runs out.
///
/// A fixed step that fails to lower `g` is halved until it does, so the
/// recorded trace is strictly decreasing.
pub fn run_descent(
    game: &BimatrixGame,
    config: &SolverConfig,
    initial: &StrategyProfile,
) -> Result<StationaryCertificate> {
    config.validate()?;
    if initial.n() != game.n() {
        return Err(Error::DimensionMismatch {
            expected: game.n(),
            actual: initial.n(),
        });
    }
    let delta = config.delta;
    let weight = config.step_weight();
    let mut profile = initial.clone();
    let mut descent_trace = Vec::new();
    let mut backtracked_steps = 0;

    for iteration in 1..=config.max_iterations {
        profile = equalize_regrets(game, &profile)?;
        let g = game.regret_report(&profile)?.max_regret;
        descent_trace.push(g);
        let primal = solve_primal(game, &profile, config.br_tol)?;
        trace!(
            "iter {iteration}: g = {g:.6e}, gamma = {:.6e}",
            primal.gamma
        );

        let finish = |termination, descent_trace, backtracked_steps| StationaryCertificate {
            profile: profile.clone(),
            gamma: primal.gamma,
            g_value: g,
            iterations_used: iteration,
            descent_trace,
            termination,
            backtracked_steps,
        };

        if primal.gamma - g >= -delta {
            debug!("stationary after {iteration} iterations, g = {g:.6}");
            return Ok(finish(
                Termination::Stationary,
                descent_trace,
                backtracked_steps,
            ));
        }
        if config.fast_mode && g <= 1.0 / 3.0 + delta {
            return Ok(finish(
                Termination::EarlyExit,
                descent_trace,
                backtracked_steps,
            ));
        }
        if iteration == config.max_iterations {
            debug!("iteration cap {iteration} reached at g = {g:.6}");
            return Ok(finish(
                Termination::IterationCap,
                descent_trace,
                backtracked_steps,
            ));
        }

        let mut w = weight;
        let mut next = None;
        for attempt in 0..=MAX_BACKTRACKS {
            let candidate = step_with_weight(&profile, &primal, w)?;
            if game.regret_report(&candidate)?.max_regret < g {
                if attempt > 0 {
                    backtracked_steps += 1;
                }
                next = Some(candidate);
                break;
            }
            w *= 0.5;
        }
        match next {
            Some(p) => profile = p,
            None => {
                debug!("no descent along LP direction at g = {g:.6}");
                return Ok(finish(
                    Termination::Stalled,
                    descent_trace,
                    backtracked_steps,
                ));
            }
        }
    }
    unreachable!("loop returns on its final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pennies() -> BimatrixGame {
        BimatrixGame::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap()
    }

    fn profile(x: &[f64], y: &[f64]) -> StrategyProfile {
        StrategyProfile::new(
            MixedStrategy::new(x.to_vec()).unwrap(),
            MixedStrategy::new(y.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn default_iteration_budget() {
        assert_eq!(SolverConfig::default_max_iterations(0.5), 160);
        assert_eq!(SolverConfig::default_max_iterations(0.1), 4000);
        assert_eq!(
            SolverConfig::default_max_iterations(0.005),
            MAX_ITERATIONS_CAP
        );
        assert!(SolverConfig::new(0.4).is_err());
        assert!(SolverConfig::new(0.0).is_err());
    }

    #[test]
    fn equalize_already_equal_is_fixed_point() {
        let g = pennies();
        let p = StrategyProfile::uniform(2);
        let out = equalize_regrets(&g, &p).unwrap();
        assert_eq!(
            g.regret_report(&out).unwrap().max_regret,
            g.regret_report(&p).unwrap().max_regret
        );
    }

    #[test]
    fn equalize_moves_exploited_column_player() {
        let g = pennies();
        let p = profile(&[1.0, 0.0], &[1.0, 0.0]);
        let out = equalize_regrets(&g, &p).unwrap();
        assert_eq!(out.row, p.row);
        let rep = g.regret_report(&out).unwrap();
        assert!((rep.row_regret - rep.col_regret).abs() <= EQUALIZE_TOL);
        assert!(rep.max_regret <= 1.0 + 1e-9);
    }

    #[test]
    fn primal_lp_constraint_count() {
        let g = BimatrixGame::from_rows(
            &[vec![0.9, 0.1], vec![0.2, 0.3]],
            &[vec![0.4, 0.8], vec![0.5, 0.6]],
        )
        .unwrap();
        let lp = build_primal_lp(&g, &StrategyProfile::uniform(2), BR_TOL).unwrap();
        assert_eq!(lp.num_constraints(), 4);
        assert_eq!(lp.num_vars(), 5);

        // all rows tie against y
        let tie = BimatrixGame::from_rows(
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
            &[vec![0.4, 0.8], vec![0.5, 0.6]],
        )
        .unwrap();
        let lp = build_primal_lp(&tie, &StrategyProfile::uniform(2), BR_TOL).unwrap();
        assert_eq!(lp.num_constraints(), 2 + 1 + 2);
    }

    #[test]
    fn descent_step_examples() {
        let p = profile(&[1.0, 0.0], &[0.5, 0.5]);
        let primal = PrimalSolution {
            gamma: 0.0,
            x_prime: MixedStrategy::pure(2, 1),
            y_prime: MixedStrategy::uniform(2),
        };
        let out = descent_step(&p, &primal, 0.1).unwrap();
        assert!((out.row.probs()[0] - (1.0 - 0.1 / 2.1)).abs() < 1e-15);
        assert!((out.row.probs()[1] - 0.1 / 2.1).abs() < 1e-15);
        assert_eq!(out.col, p.col);

        assert_eq!(descent_step(&p, &primal, 0.0).unwrap(), p);

        let fixed = PrimalSolution {
            gamma: 0.0,
            x_prime: p.row.clone(),
            y_prime: p.col.clone(),
        };
        assert_eq!(descent_step(&p, &fixed, 0.3).unwrap(), p);
    }

    #[test]
    fn pennies_is_stationary_immediately() {
        let g = pennies();
        let cert = run_descent(&g, &SolverConfig::default(), &StrategyProfile::uniform(2)).unwrap();
        assert!(cert.is_stationary());
        assert_eq!(cert.iterations_used, 1);
        assert_eq!(cert.g_value, 0.0);
    }

    #[test]
    fn dominant_strategies_reach_pure_equilibrium() {
        let g = BimatrixGame::from_rows(
            &[vec![1.0, 1.0], vec![0.0, 0.0]],
            &[vec![1.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let cfg = SolverConfig::default();
        let cert = run_descent(&g, &cfg, &StrategyProfile::uniform(2)).unwrap();
        assert!(cert.is_stationary());
        assert!(cert.g_value <= cfg.delta);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let g = BimatrixGame::from_rows(
            &[vec![1.0, 1.0], vec![0.0, 0.0]],
            &[vec![1.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let cfg = SolverConfig {
            max_iterations: 1,
            ..SolverConfig::default()
        };
        let cert = run_descent(&g, &cfg, &StrategyProfile::uniform(2)).unwrap();
        if !cert.is_stationary() {
            assert_eq!(cert.termination, Termination::IterationCap);
        }
        assert_eq!(cert.iterations_used, 1);
    }
}
