//! Dense two-phase revised simplex with Bland's least-index entering rule.
//!
//! Problems are given in a general form (`<=`, `=`, `>=` rows, per-variable
//! bounds, minimize or maximize) and rewritten internally into
//! `min c'x, Ax = b, x >= 0, b >= 0`. The basis is refactored from the
//! original data on every iteration, so rounding error does not build up
//! across pivots. Inequality rows are first loosened by tiny distinct
//! amounts to keep degenerate vertices from stalling; the true right-hand
//! sides are then restored and the basis reoptimized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feasibility tolerance on constraint rows at an optimal solution.
pub const LP_FEAS_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const RATIO_TIE_TOL: f64 = 1e-12;
/// Right-hand-side relaxation in the first ratio-test pass.
const RATIO_RELAX: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-13;
const EXPEL_TOL: f64 = 1e-7;
/// Row violation beyond which an "optimal" basis is reported as a failure.
const ACCEPT_TOL: f64 = 1e-7;
/// Relative right-hand-side relaxation used to break degeneracy.
const PERTURB: f64 = 1e-7;
/// Basic values below `-INFEAS_TOL` trigger a repair step.
const INFEAS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    objective: Vec<f64>,
    sense: Sense,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// A program over `objective.len()` variables, each bounded to
    /// `[0, +inf)` until overridden.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let bounds = vec![(0.0, f64::INFINITY); objective.len()];
        Self {
            objective,
            sense,
            constraints: Vec::new(),
            bounds,
        }
    }

    /// Appends a row and returns its index (the index of its dual value).
    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = (f64::NEG_INFINITY, f64::INFINITY);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp(
                "non-finite objective coefficient".into(),
            ));
        }
        for (k, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::MalformedLp(format!(
                    "constraint {k} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedLp(format!("constraint {k} is not finite")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::MalformedLp(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `dual_values[k]` is the sensitivity of the optimal objective to the
/// right-hand side of constraint `k`, in the program's own sense. With all
/// variables bounded below by zero and unbounded above,
/// `objective_value == sum_k dual_values[k] * rhs[k]` at optimality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal_values: Vec<f64>,
    pub objective_value: f64,
    pub dual_values: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = lo + col
    Shift { col: usize, lo: f64 },
    /// x = hi - col
    Mirror { col: usize, hi: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

/// Dense LU of a square matrix with partial row pivoting, `P B = L U`.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut lu: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&a, &b| lu[a * n + k].abs().total_cmp(&lu[b * n + k].abs()))?;
            if lu[p * n + k].abs() < SINGULAR_TOL {
                return None;
            }
            if p != k {
                for c in 0..n {
                    lu.swap(p * n + c, k * n + c);
                }
                perm.swap(p, k);
            }
            let piv = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / piv;
                if f == 0.0 {
                    continue;
                }
                lu[r * n + k] = f;
                for c in k + 1..n {
                    lu[r * n + c] -= f * lu[k * n + c];
                }
            }
        }
        Some(Self { n, lu, perm })
    }

    /// Solves `B x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] = (x[r] - s) / self.lu[r * n + r];
        }
        x
    }

    /// Solves `B^T y = c`.
    fn solve_transposed(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut w = c.to_vec();
        for r in 0..n {
            let s: f64 = (0..r).map(|k| self.lu[k * n + r] * w[k]).sum();
            w[r] = (w[r] - s) / self.lu[r * n + r];
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| self.lu[k * n + r] * w[k]).sum();
            w[r] -= s;
        }
        let mut y = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = w[i];
        }
        y
    }
}

/// Current basis with its factorization and derived quantities.
struct Iterate {
    lu: Lu,
    /// Basic variable values, `B^-1 b`.
    xb: Vec<f64>,
}

struct StandardForm {
    /// Row-major `rows x ncols`.
    a: Vec<f64>,
    b: Vec<f64>,
    rows: usize,
    ncols: usize,
    basis: Vec<usize>,
    flipped: Vec<bool>,
    /// Normalized relation of each row.
    relations: Vec<Relation>,
    first_artificial: usize,
    cost: Vec<f64>,
    var_map: Vec<VarMap>,
    user_rows: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_map = Vec::with_capacity(lp.num_vars());
        let mut structural = 0usize;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for &(lo, hi) in &lp.bounds {
            let m = if lo.is_finite() {
                let col = structural;
                structural += 1;
                if hi.is_finite() {
                    bound_rows.push((col, hi - lo));
                }
                VarMap::Shift { col, lo }
            } else if hi.is_finite() {
                let col = structural;
                structural += 1;
                VarMap::Mirror { col, hi }
            } else {
                let pos = structural;
                structural += 2;
                VarMap::Split { pos, neg: pos + 1 }
            };
            var_map.push(m);
        }

        // structural objective (always minimized)
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost_struct = vec![0.0; structural];
        for (j, m) in var_map.iter().enumerate() {
            let c = sign * lp.objective[j];
            match *m {
                VarMap::Shift { col, .. } => cost_struct[col] += c,
                VarMap::Mirror { col, .. } => cost_struct[col] -= c,
                VarMap::Split { pos, neg } => {
                    cost_struct[pos] += c;
                    cost_struct[neg] -= c;
                }
            }
        }

        // rows in structural coordinates
        let user_rows = lp.constraints.len();
        let total_rows = user_rows + bound_rows.len();
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(total_rows);
        for con in &lp.constraints {
            let mut coeffs = vec![0.0; structural];
            let mut rhs = con.rhs;
            for (j, m) in var_map.iter().enumerate() {
                let a = con.coeffs[j];
                if a == 0.0 {
                    continue;
                }
                match *m {
                    VarMap::Shift { col, lo } => {
                        coeffs[col] += a;
                        rhs -= a * lo;
                    }
                    VarMap::Mirror { col, hi } => {
                        coeffs[col] -= a;
                        rhs -= a * hi;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[pos] += a;
                        coeffs[neg] -= a;
                    }
                }
            }
            rows.push((coeffs, con.relation, rhs));
        }
        for &(col, ub) in &bound_rows {
            let mut coeffs = vec![0.0; structural];
            coeffs[col] = 1.0;
            rows.push((coeffs, Relation::Le, ub));
        }

        // normalize to rhs >= 0; a `>= 0` row becomes `<= 0` and needs no artificial
        let mut flipped = vec![false; total_rows];
        for (k, (coeffs, rel, rhs)) in rows.iter_mut().enumerate() {
            let flip = *rhs < 0.0 || (*rhs == 0.0 && *rel == Relation::Ge);
            if flip {
                flipped[k] = true;
                coeffs.iter_mut().for_each(|a| *a = -*a);
                *rhs = -*rhs;
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_slack = structural;
        let first_artificial = structural + n_slack;
        let ncols = first_artificial + n_art;

        let mut a = vec![0.0; total_rows * ncols];
        let mut b = vec![0.0; total_rows];
        let mut basis = vec![0usize; total_rows];
        let relations: Vec<Relation> = rows.iter().map(|r| r.1).collect();
        let (mut next_slack, mut next_art) = (first_slack, first_artificial);
        for (k, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            let row = &mut a[k * ncols..(k + 1) * ncols];
            row[..structural].copy_from_slice(&coeffs);
            b[k] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[k] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[k] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[k] = next_art;
                    next_art += 1;
                }
            }
        }

        let mut cost = vec![0.0; ncols];
        cost[..structural].copy_from_slice(&cost_struct);

        Self {
            a,
            b,
            rows: total_rows,
            ncols,
            basis,
            flipped,
            relations,
            first_artificial,
            cost,
            var_map,
            user_rows,
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.a[r * self.ncols + j]).collect()
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        (0..self.rows)
            .map(|r| self.a[r * self.ncols + j] * y[r])
            .sum()
    }

    /// Whether column `j` prices out as improving. The tolerance scales with
    /// the terms summed, so a column that nearly duplicates a basic one is
    /// not mistaken for an improving one.
    fn improves(&self, j: usize, c: f64, y: &[f64]) -> bool {
        let (mut dot, mut scale) = (0.0, c.abs());
        for r in 0..self.rows {
            let t = self.a[r * self.ncols + j] * y[r];
            dot += t;
            scale += t.abs();
        }
        c - dot < -COST_TOL * scale.max(1.0)
    }

    /// Factors the current basis from the original data.
    fn refactor(&self) -> Option<Iterate> {
        let m = self.rows;
        let mut bmat = vec![0.0; m * m];
        for r in 0..m {
            for (k, &j) in self.basis.iter().enumerate() {
                bmat[r * m + k] = self.a[r * self.ncols + j];
            }
        }
        let lu = Lu::factor(bmat, m)?;
        let xb = lu.solve(&self.b);
        Some(Iterate { lu, xb })
    }

    /// Runs simplex iterations under `cost`, allowing only columns below
    /// `enter_limit` to enter. Returns the final iterate and the simplex
    /// multipliers `y` with `B^T y = c_B`.
    fn iterate(
        &mut self,
        cost: &[f64],
        enter_limit: usize,
        pivots: &mut usize,
        max_pivots: usize,
    ) -> std::result::Result<(Phase, Iterate, Vec<f64>), ()> {
        // pivots since the objective last improved; past a limit the phase
        // stays on strict least-index rules
        let mut stalled = 0usize;
        // best objective seen, normal and repair
        let mut best_obj = [f64::INFINITY; 2];
        let mut strict = false;
        loop {
            let it = self.refactor().ok_or(())?;
            // the relaxed ratio test can leave basics slightly negative; once
            // that grows past INFEAS_TOL, minimize the infeasibility first
            let infeasible: Vec<bool> = it.xb.iter().map(|&x| x < -INFEAS_TOL).collect();
            let repairing = infeasible.iter().any(|&b| b);
            let cb: Vec<f64> = if repairing {
                infeasible
                    .iter()
                    .map(|&b| if b { -1.0 } else { 0.0 })
                    .collect()
            } else {
                self.basis.iter().map(|&j| cost[j]).collect()
            };
            let y = it.lu.solve_transposed(&cb);
            let mut basic = vec![false; self.ncols];
            self.basis.iter().for_each(|&j| basic[j] = true);
            let entering = (0..enter_limit).find(|&j| {
                let c = if repairing { 0.0 } else { cost[j] };
                !basic[j] && self.improves(j, c, &y)
            });
            let Some(pc) = entering else {
                if repairing {
                    return Err(());
                }
                return Ok((Phase::Optimal, it, y));
            };
            let alpha = it.lu.solve(&self.column(pc));
            let obj: f64 = cb.iter().zip(&it.xb).map(|(c, x)| c * x).sum();
            let best = &mut best_obj[repairing as usize];
            if obj < *best - RATIO_TIE_TOL * (1.0 + obj.abs()) {
                *best = obj;
                stalled = 0;
            } else {
                stalled += 1;
            }
            strict |= stalled > self.rows + enter_limit;
            let leaving = if repairing {
                self.repair_row(&it.xb, &alpha, &infeasible, strict)
            } else {
                self.leaving_row(&it.xb, &alpha, strict)
            };
            let Some(pr) = leaving else {
                if repairing {
                    return Err(());
                }
                return Ok((Phase::Unbounded, it, y));
            };
            if *pivots >= max_pivots {
                return Err(());
            }
            *pivots += 1;
            self.basis[pr] = pc;
        }
    }

    /// Leaving row for an infeasibility-reducing step: feasible basics must
    /// stay nonnegative, infeasible ones leave when they reach zero. Ties go
    /// to the largest pivot, or to the least basis index when `strict`.
    fn repair_row(
        &self,
        xb: &[f64],
        alpha: &[f64],
        infeasible: &[bool],
        strict: bool,
    ) -> Option<usize> {
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.rows {
            let a = alpha[r];
            let ratio = if infeasible[r] && a < -PIVOT_TOL {
                xb[r] / a
            } else if !infeasible[r] && a > PIVOT_TOL {
                xb[r].max(0.0) / a
            } else {
                continue;
            };
            best = match best {
                None => Some((r, ratio, a.abs())),
                Some((br, bt, ba)) => {
                    let tie = (ratio - bt).abs() <= RATIO_TIE_TOL * (1.0 + bt);
                    let wins = if strict {
                        self.basis[r] < self.basis[br]
                    } else {
                        a.abs() > ba
                    };
                    if ratio < bt && !tie || tie && wins {
                        Some((r, ratio, a.abs()))
                    } else {
                        Some((br, bt, ba))
                    }
                }
            };
        }
        best.map(|(r, _, _)| r)
    }

    /// Leaving row given basic values `xb` and entering column `alpha`.
    ///
    /// Two-pass ratio test: the step bound is computed with the right-hand
    /// sides relaxed by [`RATIO_RELAX`], then the largest pivot within that
    /// bound is taken, ties to the least basis index. `strict` switches to
    /// plain least-index tie-breaking among exact minimum ratios.
    fn leaving_row(&self, xb: &[f64], alpha: &[f64], strict: bool) -> Option<usize> {
        let relax = if strict { 0.0 } else { RATIO_RELAX };
        let mut bound = f64::INFINITY;
        for (&x, &a) in xb.iter().zip(alpha) {
            if a > PIVOT_TOL {
                bound = bound.min((x.max(0.0) + relax) / a);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let limit = bound + RATIO_TIE_TOL * (1.0 + bound);
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let a = alpha[r];
            if a <= PIVOT_TOL || xb[r].max(0.0) / a > limit {
                continue;
            }
            best = match best {
                None => Some((r, a)),
                Some((br, ba)) => {
                    let better = if strict {
                        self.basis[r] < self.basis[br]
                    } else {
                        a > ba || (a == ba && self.basis[r] < self.basis[br])
                    };
                    if better {
                        Some((r, a))
                    } else {
                        Some((br, ba))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Loosens every inequality row by a small row-dependent amount, which
    /// breaks ties between the many rows that meet at a degenerate vertex.
    fn relax_rows(&mut self) {
        for r in 0..self.rows {
            // Weyl sequence: distinct, deterministic weights in [0.5, 1.5)
            let w = 0.5 + (r as f64 * 0.618_033_988_749_894_9).fract();
            let eps = PERTURB * (1.0 + self.b[r]) * w;
            match self.relations[r] {
                Relation::Le => self.b[r] += eps,
                Relation::Ge => self.b[r] -= eps.min(0.5 * self.b[r]),
                Relation::Eq => {}
            }
        }
    }

    fn user_values(&self, xb: &[f64]) -> Vec<f64> {
        let mut cols = vec![0.0; self.ncols];
        for (r, &j) in self.basis.iter().enumerate() {
            cols[j] = xb[r].max(0.0);
        }
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, lo } => lo + cols[col],
                VarMap::Mirror { col, hi } => hi - cols[col],
                VarMap::Split { pos, neg } => cols[pos] - cols[neg],
            })
            .collect()
    }

    /// Drives zero-level artificials out of the basis where possible. Rows
    /// whose artificial cannot be replaced are redundant and keep it.
    fn expel_artificials(&mut self) -> std::result::Result<(), ()> {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let it = self.refactor().ok_or(())?;
            let mut e = vec![0.0; self.rows];
            e[r] = 1.0;
            let u = it.lu.solve_transposed(&e);
            let mut basic = vec![false; self.ncols];
            self.basis.iter().for_each(|&j| basic[j] = true);
            let candidate = (0..self.first_artificial)
                .filter(|&j| !basic[j])
                .map(|j| (j, self.column_dot(j, &u).abs()))
                .filter(|&(_, v)| v > EXPEL_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((pc, _)) = candidate {
                self.basis[r] = pc;
            }
        }
        Ok(())
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

/// Solves `lp`. Deterministic: identical input yields bitwise-identical
/// output.
enum Outcome {
    Infeasible(Vec<f64>),
    Finished(Phase, Iterate, Vec<f64>),
}

/// Both phases from the slack/artificial start basis.
fn run_phases(
    sf: &mut StandardForm,
    pivots: &mut usize,
    max_pivots: usize,
) -> std::result::Result<Outcome, ()> {
    let ncols = sf.ncols;
    let first_art = sf.first_artificial;
    if first_art < ncols {
        let mut phase1_cost = vec![0.0; ncols];
        phase1_cost[first_art..].iter_mut().for_each(|c| *c = 1.0);
        let (_, it, _) = sf.iterate(&phase1_cost, ncols, pivots, max_pivots)?;
        let infeasibility: f64 = (0..sf.rows)
            .filter(|&r| sf.basis[r] >= first_art)
            .map(|r| it.xb[r].max(0.0))
            .sum();
        if infeasibility > LP_FEAS_TOL {
            return Ok(Outcome::Infeasible(sf.user_values(&it.xb)));
        }
        sf.expel_artificials()?;
    }
    let cost = sf.cost.clone();
    let (phase, it, y) = sf.iterate(&cost, first_art, pivots, max_pivots)?;
    Ok(Outcome::Finished(phase, it, y))
}

/// Solves on relaxed rows, then restores the true right-hand sides and
/// reoptimizes from the basis found. Falls back to the unperturbed problem
/// when that does not end at an optimum.
fn run_perturbed(
    lp: &LinearProgram,
    pivots: &mut usize,
    max_pivots: usize,
) -> (StandardForm, std::result::Result<Outcome, ()>) {
    let mut sf = StandardForm::build(lp);
    let exact_b = sf.b.clone();
    sf.relax_rows();
    match run_phases(&mut sf, pivots, max_pivots) {
        // the relaxed problem contains the original one
        Ok(Outcome::Infeasible(v)) => return (sf, Ok(Outcome::Infeasible(v))),
        Ok(Outcome::Finished(Phase::Optimal, ..)) => {
            sf.b = exact_b;
            let cost = sf.cost.clone();
            let first_art = sf.first_artificial;
            if let Ok((Phase::Optimal, it, y)) = sf.iterate(&cost, first_art, pivots, max_pivots) {
                return (sf, Ok(Outcome::Finished(Phase::Optimal, it, y)));
            }
        }
        _ => {}
    }
    let mut sf = StandardForm::build(lp);
    let outcome = run_phases(&mut sf, pivots, max_pivots);
    (sf, outcome)
}

/// Solves `lp`. Deterministic: identical input yields bitwise-identical
/// output.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let max_pivots = 50 * (lp.num_vars() + lp.num_constraints()).max(1);
    let mut pivots = 0usize;
    let (sf, outcome) = run_perturbed(lp, &mut pivots, max_pivots);

    let (outcome, it, y) = match outcome {
        Ok(Outcome::Finished(phase, it, y)) => (phase, it, y),
        Ok(Outcome::Infeasible(primal_values)) => {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal_values,
                objective_value: f64::NAN,
                dual_values: Vec::new(),
            });
        }
        Err(()) => {
            let last_iterate = match sf.refactor() {
                Some(it) => sf.user_values(&it.xb),
                None => Vec::new(),
            };
            return Err(Error::SolverFailure {
                pivots,
                last_iterate,
            });
        }
    };

    let primal_values = sf.user_values(&it.xb);
    if let Phase::Unbounded = outcome {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal_values,
            objective_value: match lp.sense {
                Sense::Minimize => f64::NEG_INFINITY,
                Sense::Maximize => f64::INFINITY,
            },
            dual_values: Vec::new(),
        });
    }

    let worst = lp
        .constraints
        .iter()
        .map(|c| c.violation(&primal_values))
        .fold(0.0, f64::max);
    if worst > ACCEPT_TOL {
        log::warn!("simplex ended {worst:e} outside the feasible region");
        return Err(Error::SolverFailure {
            pivots,
            last_iterate: primal_values,
        });
    }

    let sense_sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let dual_values = (0..sf.user_rows)
        .map(|r| {
            let v = if sf.flipped[r] { -y[r] } else { y[r] };
            sense_sign * v
        })
        .collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&primal_values),
        primal_values,
        dual_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_upper_bound() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 3.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal_values[0] - 3.0).abs() < 1e-12);
        assert!((sol.objective_value - 3.0).abs() < 1e-12);
        assert!((sol.dual_values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![0.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0);
        lp.add_constraint(vec![1.0], Relation::Le, 0.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn two_variable_vertex() {
        // Basic feasible points of {x + 2y <= 4, 3x + y <= 6, x, y >= 0}:
        // (0,0), (2,0), (0,2), and the intersection (8/5, 6/5).
        // Objective x + y at those: 0, 2, 2, 14/5.
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.add_constraint(vec![3.0, 1.0], Relation::Le, 6.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective_value - 2.8).abs() < 1e-12);
        assert!((sol.primal_values[0] - 1.6).abs() < 1e-12);
        assert!((sol.primal_values[1] - 1.2).abs() < 1e-12);
        let dual_obj = sol.dual_values[0] * 4.0 + sol.dual_values[1] * 6.0;
        assert!((dual_obj - 2.8).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min x - y with x free, x >= -2 via a row, y in [1, 4]
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, -1.0]);
        lp.set_free(0);
        lp.set_bounds(1, 1.0, 4.0);
        lp.add_constraint(vec![1.0, 0.0], Relation::Ge, -2.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal_values[0] + 2.0).abs() < 1e-12);
        assert!((sol.primal_values[1] - 4.0).abs() < 1e-12);
        assert!((sol.objective_value + 6.0).abs() < 1e-12);
        assert!((sol.dual_values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_rows_and_duals() {
        // min 2a + 3b s.t. a + b = 1, a >= 0.25
        let mut lp = LinearProgram::new(Sense::Minimize, vec![2.0, 3.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![1.0, 0.0], Relation::Ge, 0.25);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
        let dual_obj = sol.dual_values[0] * 1.0 + sol.dual_values[1] * 0.25;
        assert!((dual_obj - sol.objective_value).abs() < 1e-12);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Beale's classic cycling example for the largest-coefficient rule.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 0.05).abs() < 1e-12);
    }

    #[test]
    fn malformed_programs_rejected() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve(&lp), Err(Error::MalformedLp(_))));

        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, f64::INFINITY);
        assert!(matches!(solve(&lp), Err(Error::MalformedLp(_))));

        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.set_bounds(0, 2.0, 1.0);
        assert!(matches!(solve(&lp), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
    }
}
