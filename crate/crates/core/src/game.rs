//! Bimatrix games, mixed strategies and regret evaluation.
//!
//! Every other module measures profiles through [`BimatrixGame::regret_report`],
//! which always uses the exact argmax over pure deviations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the simplex constraints of a [`MixedStrategy`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Slack used to admit near-ties into best-response sets that feed LP
/// constraints. Certification always uses an exact argmax instead.
pub const BR_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Row,
    Col,
}

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    /// Validates `probs` as a simplex point. Entries in `[-SIMPLEX_TOL, 0)`
    /// are clamped to zero.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy("empty probability vector".into()));
        }
        let mut sum = 0.0;
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidStrategy(format!("entry {i} is not finite")));
            }
            if *p < -SIMPLEX_TOL {
                return Err(Error::InvalidStrategy(format!(
                    "entry {i} is negative ({p})"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
            sum += *p;
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidStrategy(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(Self(probs))
    }

    pub fn pure(n: usize, index: usize) -> Self {
        assert!(
            index < n,
            "pure strategy index {index} out of range for n = {n}"
        );
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self(vec![1.0 / n as f64; n])
    }

    /// Clamps negatives to zero and rescales to unit mass.
    ///
    /// Used on LP outputs and convex combinations, where round-off can push
    /// the vector a few ulps off the simplex.
    pub fn project(mut weights: Vec<f64>) -> Result<Self> {
        let mut sum = 0.0;
        for w in weights.iter_mut() {
            if !w.is_finite() {
                return Err(Error::InvalidStrategy("non-finite weight".into()));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
            sum += *w;
        }
        if weights.is_empty() || sum <= 0.0 {
            return Err(Error::InvalidStrategy(
                "weights have no positive mass".into(),
            ));
        }
        if sum != 1.0 {
            for w in weights.iter_mut() {
                *w /= sum;
            }
        }
        Ok(Self(weights))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices carrying probability strictly above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// Componentwise `weight_a * a + (1 - weight_a) * b`, re-projected onto the
/// simplex.
pub fn mix(a: &MixedStrategy, b: &MixedStrategy, weight_a: f64) -> Result<MixedStrategy> {
    if !(0.0..=1.0).contains(&weight_a) {
        return Err(Error::InvalidParameter(format!(
            "mixing weight {weight_a} outside [0, 1]"
        )));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let weight_b = 1.0 - weight_a;
    let combined =
        a.0.iter()
            .zip(&b.0)
            .map(|(pa, pb)| weight_a * pa + weight_b * pb)
            .collect();
    MixedStrategy::project(combined)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
}

impl StrategyProfile {
    pub fn new(row: MixedStrategy, col: MixedStrategy) -> Result<Self> {
        if row.len() != col.len() {
            return Err(Error::DimensionMismatch {
                expected: row.len(),
                actual: col.len(),
            });
        }
        Ok(Self { row, col })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            row: MixedStrategy::uniform(n),
            col: MixedStrategy::uniform(n),
        }
    }

    pub fn n(&self) -> usize {
        self.row.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub row_regret: f64,
    pub col_regret: f64,
    pub max_regret: f64,
    pub row_br_payoff: f64,
    pub col_br_payoff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestResponseSet {
    pub indices: Vec<usize>,
    pub best_payoff: f64,
    pub tolerance: f64,
}

impl BestResponseSet {
    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// An `n x n` game with row payoffs `R` and column payoffs `C`, both stored
/// row-major and normalized to `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BimatrixGame {
    n: usize,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl BimatrixGame {
    pub fn new(n: usize, row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput(
                "game must have at least one strategy".into(),
            ));
        }
        for (name, m) in [("R", &row), ("C", &col)] {
            if m.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    actual: m.len(),
                });
            }
            if let Some(k) = m.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidInput(format!(
                    "{name}[{}][{}] = {} lies outside [0, 1]",
                    k / n,
                    k % n,
                    m[k]
                )));
            }
        }
        Ok(Self { n, row, col })
    }

    /// Builds a game from nested rows; both matrices must be square, of equal
    /// size and already normalized.
    pub fn from_rows(row: &[Vec<f64>], col: &[Vec<f64>]) -> Result<Self> {
        let n = row.len();
        let flat_r = flatten_square(row, n)?;
        let flat_c = flatten_square(col, n)?;
        Self::new(n, flat_r, flat_c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_matrix(&self) -> &[f64] {
        &self.row
    }

    pub fn col_matrix(&self) -> &[f64] {
        &self.col
    }

    #[inline]
    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.row[i * self.n + j]
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.col[i * self.n + j]
    }

    /// The same game with the roles of the players exchanged.
    pub fn transposed(&self) -> Self {
        let n = self.n;
        let mut row = vec![0.0; n * n];
        let mut col = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                row[j * n + i] = self.c(i, j);
                col[j * n + i] = self.r(i, j);
            }
        }
        Self { n, row, col }
    }

    fn check(&self, s: &MixedStrategy) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: s.len(),
            });
        }
        Ok(())
    }

    pub fn row_payoff(&self, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(bilinear(&self.row, self.n, x.probs(), y.probs()))
    }

    pub fn col_payoff(&self, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(bilinear(&self.col, self.n, x.probs(), y.probs()))
    }

    /// `R y`: the row player's payoff for each pure strategy against `y`.
    pub fn row_pure_payoffs(&self, y: &[f64]) -> Vec<f64> {
        self.row.chunks_exact(self.n).map(|r| dot(r, y)).collect()
    }

    /// `x^T C`: the column player's payoff for each pure strategy against `x`.
    pub fn col_pure_payoffs(&self, x: &[f64]) -> Vec<f64> {
        accumulate_rows(&self.col, self.n, x)
    }

    /// `x^T R`, the row player's payoff as a function of the column played.
    pub fn row_payoffs_by_column(&self, x: &[f64]) -> Vec<f64> {
        accumulate_rows(&self.row, self.n, x)
    }

    /// `C y`, the column player's payoff as a function of the row played.
    pub fn col_payoffs_by_row(&self, y: &[f64]) -> Vec<f64> {
        self.col.chunks_exact(self.n).map(|r| dot(r, y)).collect()
    }

    /// Pure strategies of `player` scoring within `tol` of the best payoff
    /// against `opponent`.
    pub fn best_response_set(
        &self,
        player: Player,
        opponent: &MixedStrategy,
        tol: f64,
    ) -> Result<BestResponseSet> {
        self.check(opponent)?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {tol} must be >= 0"
            )));
        }
        let payoffs = match player {
            Player::Row => self.row_pure_payoffs(opponent.probs()),
            Player::Col => self.col_pure_payoffs(opponent.probs()),
        };
        Ok(best_responses_of(&payoffs, tol))
    }

    /// Exact regrets of both players. This is the certification authority.
    pub fn regret_report(&self, profile: &StrategyProfile) -> Result<RegretReport> {
        self.check(&profile.row)?;
        self.check(&profile.col)?;
        Ok(self.regrets_unchecked(profile.row.probs(), profile.col.probs()))
    }

    pub(crate) fn regrets_unchecked(&self, x: &[f64], y: &[f64]) -> RegretReport {
        let ry = self.row_pure_payoffs(y);
        let xc = self.col_pure_payoffs(x);
        let row_br_payoff = max_of(&ry);
        let col_br_payoff = max_of(&xc);
        let row_regret = (row_br_payoff - dot(x, &ry)).max(0.0);
        let col_regret = (col_br_payoff - dot(&xc, y)).max(0.0);
        RegretReport {
            row_regret,
            col_regret,
            max_regret: row_regret.max(col_regret),
            row_br_payoff,
            col_br_payoff,
        }
    }

    #[inline]
    pub(crate) fn row_value(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.row, self.n, x, y)
    }

    #[inline]
    pub(crate) fn col_value(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.col, self.n, x, y)
    }
}

/// Maps each matrix independently onto `[0, 1]` by `(v - min) / (max - min)`.
/// A constant matrix becomes all zeros.
pub fn normalize_game(raw_r: &[Vec<f64>], raw_c: &[Vec<f64>]) -> Result<BimatrixGame> {
    let n = raw_r.len();
    if raw_c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: raw_c.len(),
        });
    }
    let r = flatten_square(raw_r, n)?;
    let c = flatten_square(raw_c, n)?;
    for v in r.iter().chain(&c) {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite payoff entry {v}")));
        }
    }
    BimatrixGame::new(n, normalize_matrix(r), normalize_matrix(c))
}

/// Affine map of a flat matrix onto `[0, 1]`; constant matrices become zeros.
pub fn normalize_matrix(mut m: Vec<f64>) -> Vec<f64> {
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range > 0.0 {
        for v in m.iter_mut() {
            *v = ((*v - lo) / range).clamp(0.0, 1.0);
        }
    } else {
        m.iter_mut().for_each(|v| *v = 0.0);
    }
    m
}

fn flatten_square(rows: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rows.len(),
        });
    }
    let mut flat = Vec::with_capacity(n * n);
    for r in rows {
        if r.len() != n {
            return Err(Error::InvalidInput(format!(
                "matrix is not square: row of length {} in a {n}-row matrix",
                r.len()
            )));
        }
        flat.extend_from_slice(r);
    }
    Ok(flat)
}

/// All indices within `tol` of the maximum of `payoffs`.
pub(crate) fn best_responses_of(payoffs: &[f64], tol: f64) -> BestResponseSet {
    let best = max_of(payoffs);
    let indices = payoffs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - tol)
        .map(|(i, _)| i)
        .collect();
    BestResponseSet {
        indices,
        best_payoff: best,
        tolerance: tol,
    }
}

/// First index attaining the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[inline]
pub(crate) fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn accumulate_rows(m: &[f64], n: usize, weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (row, &w) in m.chunks_exact(n).zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o += w * v;
        }
    }
    out
}

fn bilinear(m: &[f64], n: usize, x: &[f64], y: &[f64]) -> f64 {
    m.chunks_exact(n)
        .zip(x)
        .filter(|(_, &xi)| xi != 0.0)
        .map(|(row, &xi)| xi * dot(row, y))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> MixedStrategy {
        MixedStrategy::new(v.to_vec()).unwrap()
    }

    fn identity_game() -> BimatrixGame {
        BimatrixGame::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn row_payoff_examples() {
        let g = identity_game();
        assert_eq!(g.row_payoff(&s(&[1.0, 0.0]), &s(&[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(g.row_payoff(&s(&[0.5, 0.5]), &s(&[0.5, 0.5])).unwrap(), 0.5);

        let g = BimatrixGame::from_rows(
            &[vec![0.8, 0.2], vec![0.1, 0.9]],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        // 0.3 * (0.8 * 0.6 + 0.2 * 0.4) + 0.7 * (0.1 * 0.6 + 0.9 * 0.4)
        let v = g.row_payoff(&s(&[0.3, 0.7]), &s(&[0.6, 0.4])).unwrap();
        assert!((v - 0.462).abs() < 1e-15);
    }

    #[test]
    fn col_payoff_examples() {
        let g = identity_game();
        assert_eq!(g.col_payoff(&s(&[1.0, 0.0]), &s(&[0.0, 1.0])).unwrap(), 1.0);

        let m = vec![vec![0.3, 0.9], vec![0.5, 0.1]];
        let sym = BimatrixGame::from_rows(&m, &m).unwrap();
        let (x, y) = (s(&[0.25, 0.75]), s(&[0.6, 0.4]));
        assert_eq!(
            sym.row_payoff(&x, &y).unwrap(),
            sym.col_payoff(&x, &y).unwrap()
        );

        let flat = BimatrixGame::from_rows(&m, &[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((flat.col_payoff(&x, &y).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn payoff_rejects_dimension_mismatch() {
        let g = identity_game();
        let err = g
            .row_payoff(&s(&[1.0, 0.0, 0.0]), &s(&[1.0, 0.0]))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                actual: 3
            }
        ));
    }

    #[test]
    fn best_response_sets() {
        let g = identity_game();
        let br = g
            .best_response_set(Player::Row, &s(&[1.0, 0.0]), 0.0)
            .unwrap();
        assert_eq!(br.indices, vec![0]);
        assert_eq!(br.best_payoff, 1.0);

        let br = g
            .best_response_set(Player::Row, &s(&[0.5, 0.5]), 0.0)
            .unwrap();
        assert_eq!(br.indices, vec![0, 1]);
        assert_eq!(br.best_payoff, 0.5);

        let g = BimatrixGame::from_rows(
            &[vec![0.5, 0.5], vec![0.499, 0.499]],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let br = g
            .best_response_set(Player::Row, &s(&[0.5, 0.5]), 1e-2)
            .unwrap();
        assert_eq!(br.indices, vec![0, 1]);
        assert!(g
            .best_response_set(Player::Row, &s(&[0.5, 0.5]), -1.0)
            .is_err());
    }

    #[test]
    fn regret_report_examples() {
        let g = identity_game();
        let rep = g.regret_report(&StrategyProfile::uniform(2)).unwrap();
        assert_eq!((rep.row_regret, rep.col_regret), (0.0, 0.0));

        let p = StrategyProfile::new(s(&[1.0, 0.0]), s(&[1.0, 0.0])).unwrap();
        let rep = g.regret_report(&p).unwrap();
        assert_eq!(rep.row_regret, 0.0);
        assert_eq!(rep.col_regret, 1.0);
        assert_eq!(rep.max_regret, 1.0);
    }

    #[test]
    fn regret_report_matches_pure_deviation_enumeration() {
        let r = [[0.8, 0.2], [0.1, 0.9]];
        let g = BimatrixGame::from_rows(
            &[vec![0.8, 0.2], vec![0.1, 0.9]],
            &[vec![0.8, 0.1], vec![0.2, 0.9]],
        )
        .unwrap();
        let (x, y) = ([0.3, 0.7], [0.6, 0.4]);
        let pay = |a: [f64; 2], m: &[[f64; 2]; 2], b: [f64; 2]| -> f64 {
            let mut t = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    t += a[i] * m[i][j] * b[j];
                }
            }
            t
        };
        let c = [[0.8, 0.1], [0.2, 0.9]];
        let base_r = pay(x, &r, y);
        let base_c = pay(x, &c, y);
        let dev_r = [pay([1.0, 0.0], &r, y), pay([0.0, 1.0], &r, y)];
        let dev_c = [pay(x, &c, [1.0, 0.0]), pay(x, &c, [0.0, 1.0])];
        let want_r = dev_r[0].max(dev_r[1]) - base_r;
        let want_c = dev_c[0].max(dev_c[1]) - base_c;

        let rep = g
            .regret_report(&StrategyProfile::new(s(&x), s(&y)).unwrap())
            .unwrap();
        assert!((rep.row_regret - want_r).abs() < 1e-15);
        assert!((rep.col_regret - want_c).abs() < 1e-15);
        assert_eq!(rep.max_regret, rep.row_regret.max(rep.col_regret));
    }

    #[test]
    fn mix_examples() {
        let e0 = MixedStrategy::pure(2, 0);
        let e1 = MixedStrategy::pure(2, 1);
        assert_eq!(mix(&e0, &e1, 1.0).unwrap(), e0);
        assert_eq!(mix(&e0, &e1, 0.5).unwrap().probs(), &[0.5, 0.5]);
        let m = mix(&s(&[0.2, 0.8]), &s(&[0.6, 0.4]), 0.25).unwrap();
        assert!((m.probs()[0] - 0.5).abs() < 1e-15);
        assert!((m.probs()[1] - 0.5).abs() < 1e-15);
        assert!(matches!(
            mix(&e0, &e1, 1.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            mix(&e0, &e1, -0.1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let g = normalize_game(
            &[vec![2.0, 4.0], vec![6.0, 8.0]],
            &[vec![5.0, 5.0], vec![5.0, 5.0]],
        )
        .unwrap();
        let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in g.row_matrix().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(g.col_matrix().iter().all(|&v| v == 0.0));

        let m = vec![vec![0.0, 0.25], vec![1.0, 0.5]];
        let g = normalize_game(&m, &m).unwrap();
        assert_eq!(g.row_matrix(), &[0.0, 0.25, 1.0, 0.5]);

        assert!(normalize_game(&[vec![f64::NAN]], &[vec![0.0]]).is_err());
        assert!(normalize_game(&[vec![1.0, 2.0]], &[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn strategy_validation() {
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![-0.1, 1.1]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        let clamped = MixedStrategy::new(vec![-1e-12, 1.0]).unwrap();
        assert_eq!(clamped.probs(), &[0.0, 1.0]);
        assert!(serde_json::from_str::<MixedStrategy>("[0.5, 0.4]").is_err());
    }

    #[test]
    fn game_rejects_out_of_range_entries() {
        assert!(BimatrixGame::new(1, vec![1.5], vec![0.0]).is_err());
        assert!(BimatrixGame::new(2, vec![0.0; 3], vec![0.0; 4]).is_err());
    }
}
