//! Brute-force LP oracle: enumerates every basic point of a small program
//! with nonnegative variables and keeps the best feasible one.

use anash_core::lp::{LinearProgram, Relation, Sense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const BOX: f64 = 1e6;
const FEAS: f64 = 1e-9;

/// Requires default bounds `[0, inf)` on every variable.
pub fn enumerate(lp: &LinearProgram) -> Outcome {
    let n = lp.num_vars();
    assert!(lp
        .bounds()
        .iter()
        .all(|&(lo, hi)| lo == 0.0 && hi == f64::INFINITY));

    // hyperplanes a.x = b: constraints, then x_j = 0, then x_j = BOX
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut forced = Vec::new();
    for (k, c) in lp.constraints().iter().enumerate() {
        planes.push((c.coeffs.clone(), c.rhs));
        if c.relation == Relation::Eq {
            forced.push(k);
        }
    }
    let first_box = planes.len() + n;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, BOX));
    }
    if forced.len() > n {
        return overdetermined(lp, &planes, &forced);
    }
    let free: Vec<usize> = (0..planes.len()).filter(|k| !forced.contains(k)).collect();

    let sign = if lp.sense() == Sense::Maximize {
        1.0
    } else {
        -1.0
    };
    let mut best_plain: Option<f64> = None;
    let mut best_boxed: Option<f64> = None;
    for combo in combinations(&free, n - forced.len()) {
        let mut active = forced.clone();
        active.extend(combo);
        let Some(x) = solve_square(
            &active
                .iter()
                .map(|&k| planes[k].clone())
                .collect::<Vec<_>>(),
        ) else {
            continue;
        };
        if !feasible(lp, &x) {
            continue;
        }
        let v = sign * lp.objective_at(&x);
        let uses_box = active.iter().any(|&k| k >= first_box);
        let slot = if uses_box {
            &mut best_boxed
        } else {
            &mut best_plain
        };
        if slot.map_or(true, |b| v > b) {
            *slot = Some(v);
        }
    }
    match (best_plain, best_boxed) {
        (None, None) => Outcome::Infeasible,
        (None, Some(_)) => Outcome::Unbounded,
        (Some(p), Some(b)) if b > p + 1e-6 * (1.0 + p.abs()) => Outcome::Unbounded,
        (Some(p), _) => Outcome::Optimal(sign * p),
    }
}

/// More equalities than variables: any feasible point solving a square
/// subsystem is the unique feasible point.
fn overdetermined(lp: &LinearProgram, planes: &[(Vec<f64>, f64)], forced: &[usize]) -> Outcome {
    for combo in combinations(forced, lp.num_vars()) {
        if let Some(x) = solve_square(&combo.iter().map(|&k| planes[k].clone()).collect::<Vec<_>>())
        {
            if feasible(lp, &x) {
                return Outcome::Optimal(lp.objective_at(&x));
            }
        }
    }
    Outcome::Infeasible
}

fn feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    x.iter().all(|&v| v >= -FEAS && v <= BOX + FEAS)
        && lp
            .constraints()
            .iter()
            .all(|c| c.violation(x) <= FEAS * (1.0 + c.rhs.abs()))
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

fn solve_square(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(*b);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
