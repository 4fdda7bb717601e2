//! The dual of the direction LP at a stationary point, and the strategies
//! `(w, z)` and parameters `(λ, μ)` read off it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{argmax, BimatrixGame, MixedStrategy, Player, StrategyProfile};
use crate::lp::{self, LinearProgram, LpSolution, Relation, Sense};

/// Below this mass the dual weights of one side are treated as absent.
pub const P_DEGENERATE_TOL: f64 = 1e-9;

const FREE_BOUND: f64 = 2.0;

/// The dual program together with the index sets it was built on.
///
/// Variables: `[p_i for i in row_set] [q_j for j in col_set] P Q a b`, with
/// `a` and `b` boxed to `[-2, 2]`. Rows: `P = Σp`, `Q = Σq`, `P + Q = 1`, then one row per
/// row strategy `k` and one per column strategy `l`.
#[derive(Clone, Debug)]
pub struct DualProgram {
    pub lp: LinearProgram,
    pub row_set: Vec<usize>,
    pub col_set: Vec<usize>,
}

impl DualProgram {
    pub fn p_var(&self, slot: usize) -> usize {
        slot
    }

    pub fn q_var(&self, slot: usize) -> usize {
        self.row_set.len() + slot
    }

    pub fn mass_p_var(&self) -> usize {
        self.row_set.len() + self.col_set.len()
    }

    pub fn mass_q_var(&self) -> usize {
        self.mass_p_var() + 1
    }

    pub fn a_var(&self) -> usize {
        self.mass_p_var() + 2
    }

    pub fn b_var(&self) -> usize {
        self.mass_p_var() + 3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub w: MixedStrategy,
    pub z: MixedStrategy,
    /// Total row-side weight `P`; `Q = 1 - P`.
    pub p_mass: f64,
    pub q_mass: f64,
    pub a: f64,
    pub b: f64,
    pub dual_objective: f64,
    /// `(i, p_i)` over the row best-response set.
    pub row_weights: Vec<(usize, f64)>,
    pub col_weights: Vec<(usize, f64)>,
    /// `w` fell back to a pure best response because `P` was negligible.
    pub degenerate_row: bool,
    pub degenerate_col: bool,
}

impl DualSolution {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_row || self.degenerate_col
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructParams {
    pub lambda: f64,
    pub mu: f64,
}

pub fn build_dual_lp(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    br_tol: f64,
) -> Result<DualProgram> {
    let n = game.n();
    if profile.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: profile.n(),
        });
    }
    let (x, y) = (profile.row.probs(), profile.col.probs());
    let row_set = game
        .best_response_set(Player::Row, &profile.col, br_tol)?
        .indices;
    let col_set = game
        .best_response_set(Player::Col, &profile.row, br_tol)?
        .indices;

    let ry = game.row_pure_payoffs(y); // R(e_k, y)
    let xr = game.row_payoffs_by_column(x); // R(x, e_l)
    let cy = game.col_payoffs_by_row(y); // C(e_k, y)
    let xc = game.col_pure_payoffs(x); // C(x, e_l)

    let mut objective = vec![0.0; row_set.len() + col_set.len() + 4];
    let mut prog = DualProgram {
        lp: LinearProgram::new(Sense::Maximize, Vec::new()),
        row_set,
        col_set,
    };
    objective[prog.mass_p_var()] = game.row_value(x, y);
    objective[prog.mass_q_var()] = game.col_value(x, y);
    objective[prog.a_var()] = 1.0;
    objective[prog.b_var()] = 1.0;
    let width = objective.len();
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    // a and b are free in the model. At any optimum each equals a minimum of
    // terms bounded by P + Q = 1 in magnitude, so the box [-2, 2] is slack
    // there, and it keeps far-away vertices out of the simplex path.
    lp.set_bounds(prog.a_var(), -FREE_BOUND, FREE_BOUND);
    lp.set_bounds(prog.b_var(), -FREE_BOUND, FREE_BOUND);

    let mut mass_p = vec![0.0; width];
    mass_p[prog.mass_p_var()] = 1.0;
    (0..prog.row_set.len()).for_each(|s| mass_p[prog.p_var(s)] = -1.0);
    lp.add_constraint(mass_p, Relation::Eq, 0.0);

    let mut mass_q = vec![0.0; width];
    mass_q[prog.mass_q_var()] = 1.0;
    (0..prog.col_set.len()).for_each(|s| mass_q[prog.q_var(s)] = -1.0);
    lp.add_constraint(mass_q, Relation::Eq, 0.0);

    let mut total = vec![0.0; width];
    total[prog.mass_p_var()] = 1.0;
    total[prog.mass_q_var()] = 1.0;
    lp.add_constraint(total, Relation::Eq, 1.0);

    // a <= Σ_i -R(e_k, y) p_i + Σ_j (C_kj - C(e_k, y)) q_j
    for k in 0..n {
        let mut row = vec![0.0; width];
        row[prog.a_var()] = 1.0;
        for s in 0..prog.row_set.len() {
            row[prog.p_var(s)] = ry[k];
        }
        for (s, &j) in prog.col_set.iter().enumerate() {
            row[prog.q_var(s)] = cy[k] - game.c(k, j);
        }
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    // b <= Σ_j -C(x, e_l) q_j + Σ_i (R_il - R(x, e_l)) p_i
    for l in 0..n {
        let mut row = vec![0.0; width];
        row[prog.b_var()] = 1.0;
        for s in 0..prog.col_set.len() {
            row[prog.q_var(s)] = xc[l];
        }
        for (s, &i) in prog.row_set.iter().enumerate() {
            row[prog.p_var(s)] = xr[l] - game.r(i, l);
        }
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    prog.lp = lp;
    Ok(prog)
}

/// Normalizes the dual weights into `w = p / P` and `z = q / Q`.
///
/// When a side carries less than [`P_DEGENERATE_TOL`] mass its strategy is
/// replaced by the least-index best response against the stationary point.
pub fn extract_duals(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    program: &DualProgram,
    solution: &LpSolution,
) -> Result<DualSolution> {
    if !solution.is_optimal() {
        return Err(Error::Internal(format!(
            "dual LP returned {:?}",
            solution.status
        )));
    }
    let v = &solution.primal_values;
    if v.len() != program.lp.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: program.lp.num_vars(),
            actual: v.len(),
        });
    }
    let n = game.n();
    let row_weights: Vec<(usize, f64)> = program
        .row_set
        .iter()
        .enumerate()
        .map(|(s, &i)| (i, v[program.p_var(s)].max(0.0)))
        .collect();
    let col_weights: Vec<(usize, f64)> = program
        .col_set
        .iter()
        .enumerate()
        .map(|(s, &j)| (j, v[program.q_var(s)].max(0.0)))
        .collect();
    let p_sum: f64 = row_weights.iter().map(|w| w.1).sum();
    let q_sum: f64 = col_weights.iter().map(|w| w.1).sum();

    let (w, degenerate_row) = normalize_side(&row_weights, p_sum, n, || {
        argmax(&game.row_pure_payoffs(profile.col.probs()))
    })?;
    let (z, degenerate_col) = normalize_side(&col_weights, q_sum, n, || {
        argmax(&game.col_pure_payoffs(profile.row.probs()))
    })?;

    Ok(DualSolution {
        w,
        z,
        p_mass: v[program.mass_p_var()],
        q_mass: v[program.mass_q_var()],
        a: v[program.a_var()],
        b: v[program.b_var()],
        dual_objective: solution.objective_value,
        row_weights,
        col_weights,
        degenerate_row,
        degenerate_col,
    })
}

fn normalize_side(
    weights: &[(usize, f64)],
    mass: f64,
    n: usize,
    fallback: impl FnOnce() -> usize,
) -> Result<(MixedStrategy, bool)> {
    if mass < P_DEGENERATE_TOL {
        return Ok((MixedStrategy::pure(n, fallback()), true));
    }
    let mut full = vec![0.0; n];
    for &(i, p) in weights {
        full[i] = p / mass;
    }
    Ok((MixedStrategy::project(full)?, false))
}

pub fn solve_dual(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    br_tol: f64,
) -> Result<DualSolution> {
    let program = build_dual_lp(game, profile, br_tol)?;
    let solution = lp::solve(&program.lp)?;
    extract_duals(game, profile, &program, &solution)
}

/// `λ = R(w, z) - R(x_s, z)` and `μ = C(w, z) - C(w, y_s)`.
pub fn compute_lambda_mu(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    duals: &DualSolution,
) -> Result<ConstructParams> {
    let (w, z) = (&duals.w, &duals.z);
    let lambda = game.row_payoff(w, z)? - game.row_payoff(&profile.row, z)?;
    let mu = game.col_payoff(w, z)? - game.col_payoff(w, &profile.col)?;
    Ok(ConstructParams { lambda, mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::solve_primal;
    use crate::game::BR_TOL;

    fn game() -> BimatrixGame {
        BimatrixGame::from_rows(
            &[
                vec![0.9, 0.1, 0.4],
                vec![0.2, 0.8, 0.3],
                vec![0.5, 0.5, 0.5],
            ],
            &[
                vec![0.1, 0.7, 0.3],
                vec![0.6, 0.2, 0.9],
                vec![0.4, 0.4, 0.0],
            ],
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
    fn strong_duality_with_primal() {
        let g = game();
        for p in [
            StrategyProfile::uniform(3),
            profile(&[0.7, 0.2, 0.1], &[0.1, 0.3, 0.6]),
            profile(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]),
        ] {
            let primal = solve_primal(&g, &p, BR_TOL).unwrap();
            let dual = solve_dual(&g, &p, BR_TOL).unwrap();
            assert!(
                (primal.gamma - dual.dual_objective).abs() < 1e-9,
                "{} vs {}",
                primal.gamma,
                dual.dual_objective
            );
            assert!((dual.p_mass + dual.q_mass - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_strategies_are_supported_on_best_responses() {
        let g = game();
        let p = profile(&[0.7, 0.2, 0.1], &[0.1, 0.3, 0.6]);
        let d = solve_dual(&g, &p, BR_TOL).unwrap();
        let rows = g.best_response_set(Player::Row, &p.col, BR_TOL).unwrap();
        let cols = g.best_response_set(Player::Col, &p.row, BR_TOL).unwrap();
        for i in d.w.support(1e-12) {
            assert!(rows.contains(i) || d.degenerate_row);
        }
        for j in d.z.support(1e-12) {
            assert!(cols.contains(j) || d.degenerate_col);
        }
    }

    #[test]
    fn lambda_mu_example() {
        // Against y_s = e_0 the row player's unique best response is e_0, so
        // w = e_0 and λ = R(e_0, z) - R(x_s, z).
        let g = game();
        let p = profile(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]);
        let d = solve_dual(&g, &p, BR_TOL).unwrap();
        let params = compute_lambda_mu(&g, &p, &d).unwrap();
        let lam = g.row_payoff(&d.w, &d.z).unwrap() - g.row_payoff(&p.row, &d.z).unwrap();
        let mu = g.col_payoff(&d.w, &d.z).unwrap() - g.col_payoff(&d.w, &p.col).unwrap();
        assert_eq!(params.lambda, lam);
        assert_eq!(params.mu, mu);
        assert!(params.lambda <= 1.0 && params.mu <= 1.0);
    }

    #[test]
    fn degenerate_side_falls_back_to_best_response() {
        let weights = vec![(1, 0.0)];
        let (w, degenerate) = normalize_side(&weights, 0.0, 3, || 2).unwrap();
        assert!(degenerate);
        assert_eq!(w, MixedStrategy::pure(3, 2));
    }
}
