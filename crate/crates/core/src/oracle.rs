//! Ground truth for small games and runtime checks of the bounds the
//! construction relies on.
//!
//! Nothing here is used to produce solver output; it only verifies it.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::construct::{Case4Params, Case5Params};
use crate::descent::StationaryCertificate;
use crate::dual::{ConstructParams, DualSolution};
use crate::error::{Error, Result};
use crate::game::{argmax, mix, BimatrixGame, MixedStrategy, RegretReport, StrategyProfile};

pub const DEFAULT_MAX_N: usize = 5;
const RESIDUAL_TOL: f64 = 1e-8;
const PIVOT_EPS: f64 = 1e-12;
const NONNEG_TOL: f64 = 1e-9;
const EQUILIBRIUM_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactEquilibrium {
    pub profile: StrategyProfile,
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
    /// Largest violation of the indifference system.
    pub residual: f64,
}

/// `true` iff the profile's max regret is at most `epsilon + 1e-9`.
pub fn certify(
    game: &BimatrixGame,
    profile: &StrategyProfile,
    epsilon: f64,
) -> Result<(bool, RegretReport)> {
    let report = game.regret_report(profile)?;
    Ok((report.max_regret <= epsilon + 1e-9, report))
}

/// All equilibria found by enumerating support pairs. Equal-size pairs come
/// first, then unequal ones, each group ordered by total support size.
pub fn support_enumeration(game: &BimatrixGame, max_n: usize) -> Result<Vec<ExactEquilibrium>> {
    let n = game.n();
    if n > max_n {
        return Err(Error::InvalidParameter(format!(
            "support enumeration limited to n <= {max_n}, got {n}"
        )));
    }
    let subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    let mut pairs: Vec<(&Vec<usize>, &Vec<usize>)> = Vec::new();
    for rs in &subsets {
        for cs in &subsets {
            pairs.push((rs, cs));
        }
    }
    pairs.sort_by_key(|(rs, cs)| (rs.len() != cs.len(), rs.len() + cs.len()));

    let mut found: Vec<ExactEquilibrium> = Vec::new();
    for (rs, cs) in pairs {
        match solve_support_pair(game, rs, cs) {
            Some(eq) => {
                let seen = found.iter().any(|f| {
                    linf(f.profile.row.probs(), eq.profile.row.probs()) < 1e-7
                        && linf(f.profile.col.probs(), eq.profile.col.probs()) < 1e-7
                });
                if !seen {
                    found.push(eq);
                }
            }
            None => continue,
        }
    }
    Ok(found)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

fn solve_support_pair(
    game: &BimatrixGame,
    rows: &[usize],
    cols: &[usize],
) -> Option<ExactEquilibrium> {
    let n = game.n();
    // y on `cols` makes every row in `rows` earn the same value v.
    let mut a = Vec::new();
    for &i in rows {
        let mut eq: Vec<f64> = cols.iter().map(|&j| game.r(i, j)).collect();
        eq.push(-1.0);
        eq.push(0.0);
        a.push(eq);
    }
    let mut sum = vec![1.0; cols.len()];
    sum.extend([0.0, 1.0]);
    a.push(sum);
    let (ysol, yres) = match solve_dense(a) {
        Some(s) => s,
        None => {
            debug!("singular row indifference system for supports {rows:?} x {cols:?}");
            return None;
        }
    };

    let mut b = Vec::new();
    for &j in cols {
        let mut eq: Vec<f64> = rows.iter().map(|&i| game.c(i, j)).collect();
        eq.push(-1.0);
        eq.push(0.0);
        b.push(eq);
    }
    let mut sum = vec![1.0; rows.len()];
    sum.extend([0.0, 1.0]);
    b.push(sum);
    let (xsol, xres) = match solve_dense(b) {
        Some(s) => s,
        None => {
            debug!("singular column indifference system for supports {rows:?} x {cols:?}");
            return None;
        }
    };

    if ysol[..cols.len()]
        .iter()
        .chain(&xsol[..rows.len()])
        .any(|&p| p < -NONNEG_TOL)
    {
        return None;
    }
    let mut x = vec![0.0; n];
    for (s, &i) in rows.iter().enumerate() {
        x[i] = xsol[s].max(0.0);
    }
    let mut y = vec![0.0; n];
    for (s, &j) in cols.iter().enumerate() {
        y[j] = ysol[s].max(0.0);
    }
    let profile = StrategyProfile::new(
        MixedStrategy::project(x).ok()?,
        MixedStrategy::project(y).ok()?,
    )
    .ok()?;
    let report = game.regret_report(&profile).ok()?;
    if report.max_regret > EQUILIBRIUM_TOL {
        return None;
    }
    Some(ExactEquilibrium {
        row_support: profile.row.support(NONNEG_TOL),
        col_support: profile.col.support(NONNEG_TOL),
        profile,
        residual: xres.max(yres),
    })
}

/// Solves an augmented system `[A | b]` by elimination with partial pivoting.
/// Returns `None` unless the solution is unique and satisfies every equation
/// within the residual tolerance.
fn solve_dense(mut m: Vec<Vec<f64>>) -> Option<(Vec<f64>, f64)> {
    let rows = m.len();
    let cols = m[0].len() - 1;
    let original = m.clone();
    let mut pivot_row = 0;
    for c in 0..cols {
        let best = (pivot_row..rows).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[best][c].abs() < PIVOT_EPS {
            return None;
        }
        m.swap(pivot_row, best);
        for r in 0..rows {
            if r != pivot_row {
                let f = m[r][c] / m[pivot_row][c];
                if f != 0.0 {
                    for k in c..=cols {
                        m[r][k] -= f * m[pivot_row][k];
                    }
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows && c + 1 < cols {
            return None;
        }
    }
    let sol: Vec<f64> = (0..cols).map(|c| m[c][cols] / m[c][c]).collect();
    let residual = original
        .iter()
        .map(|eq| (eq[..cols].iter().zip(&sol).map(|(a, s)| a * s).sum::<f64>() - eq[cols]).abs())
        .fold(0.0, f64::max);
    (residual <= RESIDUAL_TOL).then_some((sol, residual))
}

/// Exhaustive scan of both simplices on a grid with the given spacing.
/// Returns the grid profile with least max regret.
pub fn grid_min_regret(game: &BimatrixGame, resolution: f64) -> Result<(StrategyProfile, f64)> {
    let n = game.n();
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "grid scan limited to n <= 3, got {n}"
        )));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "resolution must lie in (0, 1], got {resolution}"
        )));
    }
    let steps = (1.0 / resolution).round().max(1.0) as usize;
    let points = simplex_grid(n, steps);

    let ry: Vec<(Vec<f64>, f64)> = points
        .iter()
        .map(|y| {
            let v = game.row_pure_payoffs(y);
            let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (v, m)
        })
        .collect();
    let xc: Vec<(Vec<f64>, f64)> = points
        .iter()
        .map(|x| {
            let v = game.col_pure_payoffs(x);
            let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (v, m)
        })
        .collect();

    let mut best = (0, 0, f64::INFINITY);
    for (xi, x) in points.iter().enumerate() {
        for (yi, y) in points.iter().enumerate() {
            let (ref ryv, rmax) = ry[yi];
            let (ref xcv, cmax) = xc[xi];
            let rr = rmax - x.iter().zip(ryv).map(|(a, b)| a * b).sum::<f64>();
            let cr = cmax - xcv.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            let g = rr.max(cr).max(0.0);
            if g < best.2 {
                best = (xi, yi, g);
            }
        }
    }
    let profile = StrategyProfile::new(
        MixedStrategy::project(points[best.0].clone())?,
        MixedStrategy::project(points[best.1].clone())?,
    )?;
    Ok((profile, best.2))
}

fn simplex_grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, steps, steps, &mut Vec::new(), &mut out);
    out
}

/// One inequality `lhs <= rhs + tol` checked at runtime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl BoundCheck {
    fn le(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            tol,
        }
    }

    fn close(name: &str, a: f64, b: f64, tol: f64) -> Self {
        Self::le(name, (a - b).abs(), 0.0, tol)
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.tol
    }
}

/// Bounds that hold at every stationary point, recomputed from the game.
pub fn stationary_checks(
    game: &BimatrixGame,
    cert: &StationaryCertificate,
    duals: &DualSolution,
    delta: f64,
) -> Result<Vec<BoundCheck>> {
    let s = &cert.profile;
    let (w, z) = (&duals.w, &duals.z);
    let g = game.regret_report(s)?.max_regret;
    let lam = game.row_payoff(w, z)? - game.row_payoff(&s.row, z)?;
    let mu = game.col_payoff(w, z)? - game.col_payoff(w, &s.col)?;
    let p = duals.p_mass;

    let mut out = vec![
        BoundCheck::close("strong-duality", duals.dual_objective, cert.gamma, 1e-6),
        BoundCheck::close("mass-sum", duals.p_mass + duals.q_mass, 1.0, 1e-8),
        BoundCheck::le("g-le-p-lambda", g, p * lam + delta, 1e-6),
        BoundCheck::le("g-le-q-mu", g, (1.0 - p) * mu + delta, 1e-6),
        BoundCheck::le("lambda-le-rwz", lam, game.row_payoff(w, z)?, 1e-12),
        BoundCheck::le("mu-le-cwz", mu, game.col_payoff(w, z)?, 1e-12),
    ];
    if lam > 0.0 && mu > 0.0 {
        out.push(BoundCheck::le(
            "g-le-harmonic",
            g,
            lam * mu / (lam + mu) + delta,
            1e-6,
        ));
    }
    if lam <= 0.0 || mu <= 0.0 {
        out.push(BoundCheck::le("g-le-delta", g, delta, 1e-6));
    }
    // the dual strategies are best responses to the stationary point
    let w_gap =
        crate::game::max_of(&game.row_pure_payoffs(s.col.probs())) - game.row_payoff(w, &s.col)?;
    let z_gap =
        crate::game::max_of(&game.col_pure_payoffs(s.row.probs())) - game.col_payoff(&s.row, z)?;
    out.push(BoundCheck::le("w-best-response", w_gap, 0.0, 2e-7));
    out.push(BoundCheck::le("z-best-response", z_gap, 0.0, 2e-7));
    Ok(out)
}

/// Bounds for the case `½ < λ ≤ 2/3 < μ`, recomputed from the raw
/// strategies rather than taken from `p4`.
pub fn case4_checks(
    game: &BimatrixGame,
    cert: &StationaryCertificate,
    duals: &DualSolution,
    params: &ConstructParams,
    p4: &Case4Params,
    delta: f64,
) -> Result<Vec<BoundCheck>> {
    let s = &cert.profile;
    let ys = &s.col;
    let (w, z) = (&duals.w, &duals.z);
    let (lam, mu) = (params.lambda, params.mu);
    let g = game.regret_report(s)?.max_regret;
    let p = duals.p_mass;

    let y_hat = mix(ys, z, 0.5)?;
    let w_hat = MixedStrategy::pure(game.n(), argmax(&game.row_pure_payoffs(y_hat.probs())));
    let t_r = game.row_payoff(&w_hat, &y_hat)? - game.row_payoff(w, &y_hat)?;
    let v_r = game.row_payoff(w, ys)? - game.row_payoff(&w_hat, ys)?;
    let mu_hat = game.col_payoff(&w_hat, z)? - game.col_payoff(&w_hat, ys)?;

    let mut out = vec![
        BoundCheck::close("y-hat", linf(y_hat.probs(), p4.y_hat.probs()), 0.0, 1e-12),
        BoundCheck::close("w-hat", linf(w_hat.probs(), p4.w_hat.probs()), 0.0, 0.0),
        BoundCheck::close("t-r", t_r, p4.t_r, 1e-12),
        BoundCheck::close("v-r", v_r, p4.v_r, 1e-12),
        BoundCheck::close("mu-hat", mu_hat, p4.mu_hat, 1e-12),
        BoundCheck::le("t-r-nonnegative", -t_r, 0.0, 1e-9),
        BoundCheck::le(
            "r-what-z-floor",
            lam + v_r + 2.0 * t_r,
            game.row_payoff(&w_hat, z)?,
            1e-7,
        ),
        BoundCheck::le("t-r-ceiling", t_r, (1.0 - lam - v_r) / 2.0, 1e-7),
        BoundCheck::le("g-three-way", g, p * v_r + (1.0 - p) * mu_hat + delta, 1e-6),
    ];

    let at_w_yhat = game.regret_report(&StrategyProfile::new(w.clone(), y_hat.clone())?)?;
    out.push(BoundCheck::close(
        "row-regret-w-yhat",
        at_w_yhat.row_regret,
        t_r,
        1e-9,
    ));
    out.push(BoundCheck::le(
        "col-regret-w-yhat",
        at_w_yhat.col_regret,
        1.0 - mu / 2.0,
        1e-9,
    ));

    if let Some(pc) = p4.p {
        let row = mix(w, &w_hat, pc)?;
        let floor = (lam + mu) / 2.0;
        out.push(BoundCheck::le(
            "first-subcase-row-floor",
            floor,
            game.row_payoff(&row, z)?,
            1e-7,
        ));
        out.push(BoundCheck::le(
            "first-subcase-col-floor",
            floor,
            game.col_payoff(&row, z)?,
            1e-7,
        ));
    }
    if let Some(q) = p4.q {
        let col = mix(z, &y_hat, q)?;
        let rep = game.regret_report(&StrategyProfile::new(w.clone(), col)?)?;
        let bound = q * (1.0 - lam) + (1.0 - q) * t_r;
        out.push(BoundCheck::le(
            "second-subcase-row-regret",
            rep.row_regret,
            bound,
            1e-7,
        ));
        out.push(BoundCheck::le(
            "second-subcase-col-regret",
            rep.col_regret,
            bound,
            1e-7,
        ));
    }
    Ok(out)
}

/// Bounds for the case `½ < μ ≤ 2/3 < λ`, checked as the first case on the
/// transposed game with the players' roles exchanged.
pub fn case5_checks(
    game: &BimatrixGame,
    cert: &StationaryCertificate,
    duals: &DualSolution,
    params: &ConstructParams,
    p5: &Case5Params,
    delta: f64,
) -> Result<Vec<BoundCheck>> {
    let t_game = game.transposed();
    let t_cert = StationaryCertificate {
        profile: StrategyProfile::new(cert.profile.col.clone(), cert.profile.row.clone())?,
        ..cert.clone()
    };
    let t_duals = DualSolution {
        w: duals.z.clone(),
        z: duals.w.clone(),
        p_mass: duals.q_mass,
        q_mass: duals.p_mass,
        a: duals.b,
        b: duals.a,
        row_weights: duals.col_weights.clone(),
        col_weights: duals.row_weights.clone(),
        degenerate_row: duals.degenerate_col,
        degenerate_col: duals.degenerate_row,
        ..duals.clone()
    };
    let t_params = ConstructParams {
        lambda: params.mu,
        mu: params.lambda,
    };
    let t_p4 = Case4Params {
        y_hat: p5.x_hat.clone(),
        w_hat: p5.z_hat.clone(),
        w_hat_index: p5.z_hat_index,
        t_r: p5.t_c,
        v_r: p5.v_c,
        mu_hat: p5.lambda_hat,
        p: p5.p,
        q: p5.q,
    };
    case4_checks(&t_game, &t_cert, &t_duals, &t_params, &t_p4, delta)
}
