//! Builds the output profile from a stationary point and its dual
//! strategies: case dispatch on `(λ, μ)`, the closed-form mixtures for the
//! two asymmetric cases, and minimum-regret selection over all candidates.

use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::descent::{SolverConfig, StationaryCertificate};
use crate::dual::{ConstructParams, DualSolution};
use crate::error::{Error, Result};
use crate::game::{argmax, mix, BimatrixGame, MixedStrategy, RegretReport, StrategyProfile};

/// Numerical slack on the approximation guarantee.
pub const GUARANTEE_SLACK: f64 = 1e-6;

/// Slack allowed when checking a mixing coefficient lies in `[0, 1]`.
const COEFF_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    One,
    Two,
    Three,
    Four,
    Five,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "4.1")]
    FourOne,
    #[serde(rename = "4.2")]
    FourTwo,
    #[serde(rename = "5.1")]
    FiveOne,
    #[serde(rename = "5.2")]
    FiveTwo,
    #[serde(rename = "degenerate-dual")]
    DegenerateDual,
    #[serde(rename = "lambda-mu-nonpositive")]
    LambdaMuNonpositive,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 9] = [
        CaseLabel::One,
        CaseLabel::Two,
        CaseLabel::Three,
        CaseLabel::FourOne,
        CaseLabel::FourTwo,
        CaseLabel::FiveOne,
        CaseLabel::FiveTwo,
        CaseLabel::DegenerateDual,
        CaseLabel::LambdaMuNonpositive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::One => "1",
            CaseLabel::Two => "2",
            CaseLabel::Three => "3",
            CaseLabel::FourOne => "4.1",
            CaseLabel::FourTwo => "4.2",
            CaseLabel::FiveOne => "5.1",
            CaseLabel::FiveTwo => "5.2",
            CaseLabel::DegenerateDual => "degenerate-dual",
            CaseLabel::LambdaMuNonpositive => "lambda-mu-nonpositive",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown case label {s:?}")))
    }
}

/// Quantities for the case `½ < λ ≤ 2/3 < μ`. Exactly one of `p`, `q` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case4Params {
    pub y_hat: MixedStrategy,
    pub w_hat: MixedStrategy,
    pub w_hat_index: usize,
    pub t_r: f64,
    pub v_r: f64,
    pub mu_hat: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

/// The mirror of [`Case4Params`] with the players exchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case5Params {
    pub x_hat: MixedStrategy,
    pub z_hat: MixedStrategy,
    pub z_hat_index: usize,
    pub t_c: f64,
    pub v_c: f64,
    pub lambda_hat: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub profile: StrategyProfile,
    pub report: RegretReport,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub case_label: CaseLabel,
    pub lambda: f64,
    pub mu: f64,
    #[serde(rename = "P")]
    pub p_mass: f64,
    pub case4: Option<Case4Params>,
    pub case5: Option<Case5Params>,
    pub candidates: Vec<Candidate>,
    pub chosen_index: usize,
}

impl ConstructionTrace {
    pub fn chosen(&self) -> &Candidate {
        &self.candidates[self.chosen_index]
    }
}

/// Priority order: 1, 2, 3, then 4 or 5 by which parameter is larger.
pub fn dispatch_case(params: &ConstructParams) -> Case {
    let (lam, mu) = (params.lambda, params.mu);
    let lo = lam.min(mu);
    let hi = lam.max(mu);
    if lo <= 0.5 {
        Case::One
    } else if lo >= 2.0 / 3.0 {
        Case::Two
    } else if hi <= 2.0 / 3.0 {
        Case::Three
    } else if lam <= 2.0 / 3.0 {
        Case::Four
    } else {
        Case::Five
    }
}

/// Weight on `w` in the first subcase, or `None` when its conditions fail.
///
/// Conditions: `v + t >= (μ - λ) / 2` and `μ̂ >= μ - v - t`, with `μ`
/// the larger of the two parameters.
pub fn subcase1_coefficient(lambda: f64, mu: f64, v: f64, t: f64, mu_hat: f64) -> Option<f64> {
    let s = v + t;
    if s >= (mu - lambda) / 2.0 && mu_hat >= mu - s && s > 0.0 {
        Some((2.0 * s - (mu - lambda)) / (2.0 * s))
    } else {
        None
    }
}

/// Weight on `z` in the second subcase.
pub fn subcase2_coefficient(lambda: f64, mu: f64, t: f64) -> Result<f64> {
    let den = 1.0 + mu / 2.0 - lambda - t;
    if !(den > 0.0) {
        return Err(Error::InvariantViolation(format!(
            "second-subcase denominator {den} is not positive (λ = {lambda}, μ = {mu}, t = {t})"
        )));
    }
    Ok((1.0 - mu / 2.0 - t) / den)
}

fn checked_coefficient(name: &str, value: f64) -> Result<f64> {
    if !(value >= -COEFF_TOL && value <= 1.0 + COEFF_TOL) {
        return Err(Error::InvariantViolation(format!(
            "mixing coefficient {name} = {value} outside [0, 1]"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

pub fn compute_case4_params(
    game: &BimatrixGame,
    stationary: &StrategyProfile,
    duals: &DualSolution,
    params: &ConstructParams,
) -> Result<Case4Params> {
    let (lam, mu) = (params.lambda, params.mu);
    let (w, z) = (&duals.w, &duals.z);
    let ys = &stationary.col;

    let y_hat = mix(ys, z, 0.5)?;
    let w_hat_index = argmax(&game.row_pure_payoffs(y_hat.probs()));
    let w_hat = MixedStrategy::pure(game.n(), w_hat_index);

    let t_r = game.row_payoff(&w_hat, &y_hat)? - game.row_payoff(w, &y_hat)?;
    let v_r = game.row_payoff(w, ys)? - game.row_payoff(&w_hat, ys)?;
    let mu_hat = game.col_payoff(&w_hat, z)? - game.col_payoff(&w_hat, ys)?;

    let (p, q) = match subcase1_coefficient(lam, mu, v_r, t_r, mu_hat) {
        Some(p) => (Some(checked_coefficient("p", p)?), None),
        None => {
            let q = subcase2_coefficient(lam, mu, t_r)?;
            (None, Some(checked_coefficient("q", q)?))
        }
    };
    Ok(Case4Params {
        y_hat,
        w_hat,
        w_hat_index,
        t_r,
        v_r,
        mu_hat,
        p,
        q,
    })
}

pub fn compute_case5_params(
    game: &BimatrixGame,
    stationary: &StrategyProfile,
    duals: &DualSolution,
    params: &ConstructParams,
) -> Result<Case5Params> {
    let (lam, mu) = (params.lambda, params.mu);
    let (w, z) = (&duals.w, &duals.z);
    let xs = &stationary.row;

    let x_hat = mix(xs, w, 0.5)?;
    let z_hat_index = argmax(&game.col_pure_payoffs(x_hat.probs()));
    let z_hat = MixedStrategy::pure(game.n(), z_hat_index);

    let t_c = game.col_payoff(&x_hat, &z_hat)? - game.col_payoff(&x_hat, z)?;
    let v_c = game.col_payoff(xs, z)? - game.col_payoff(xs, &z_hat)?;
    let lambda_hat = game.row_payoff(w, &z_hat)? - game.row_payoff(xs, &z_hat)?;

    let (p, q) = match subcase1_coefficient(mu, lam, v_c, t_c, lambda_hat) {
        Some(p) => (Some(checked_coefficient("p", p)?), None),
        None => {
            let q = subcase2_coefficient(mu, lam, t_c)?;
            (None, Some(checked_coefficient("q", q)?))
        }
    };
    Ok(Case5Params {
        x_hat,
        z_hat,
        z_hat_index,
        t_c,
        v_c,
        lambda_hat,
        p,
        q,
    })
}

/// `(p·w + (1-p)·ŵ, z)`.
pub fn case41_candidate(params: &Case4Params, duals: &DualSolution) -> Result<StrategyProfile> {
    let p = params
        .p
        .ok_or_else(|| Error::Internal("first-subcase candidate needs p".into()))?;
    StrategyProfile::new(mix(&duals.w, &params.w_hat, p)?, duals.z.clone())
}

/// `(w, (1-q)·ŷ + q·z)`.
pub fn case42_candidate(params: &Case4Params, duals: &DualSolution) -> Result<StrategyProfile> {
    let q = params
        .q
        .ok_or_else(|| Error::Internal("second-subcase candidate needs q".into()))?;
    StrategyProfile::new(duals.w.clone(), mix(&duals.z, &params.y_hat, q)?)
}

/// `(w, p·z + (1-p)·ẑ)`.
pub fn case51_candidate(params: &Case5Params, duals: &DualSolution) -> Result<StrategyProfile> {
    let p = params
        .p
        .ok_or_else(|| Error::Internal("first-subcase candidate needs p".into()))?;
    StrategyProfile::new(duals.w.clone(), mix(&duals.z, &params.z_hat, p)?)
}

/// `((1-q)·x̂ + q·w, z)`.
pub fn case52_candidate(params: &Case5Params, duals: &DualSolution) -> Result<StrategyProfile> {
    let q = params
        .q
        .ok_or_else(|| Error::Internal("second-subcase candidate needs q".into()))?;
    StrategyProfile::new(mix(&duals.w, &params.x_hat, q)?, duals.z.clone())
}

fn case4_candidate(
    p4: &Case4Params,
    duals: &DualSolution,
) -> Result<(StrategyProfile, &'static str)> {
    if p4.p.is_some() {
        Ok((case41_candidate(p4, duals)?, "(p w + (1-p) w_hat, z)"))
    } else {
        Ok((case42_candidate(p4, duals)?, "(w, (1-q) y_hat + q z)"))
    }
}

fn case5_candidate(
    p5: &Case5Params,
    duals: &DualSolution,
) -> Result<(StrategyProfile, &'static str)> {
    if p5.p.is_some() {
        Ok((case51_candidate(p5, duals)?, "(w, p z + (1-p) z_hat)"))
    } else {
        Ok((case52_candidate(p5, duals)?, "((1-q) x_hat + q w, z)"))
    }
}

/// Assembles and certifies all candidates and returns the trace with the
/// minimum-regret one chosen (first listed on ties).
///
/// The case-specific candidate is always added when the case applies. The
/// mirrored case's candidate is added too when its parameters come out
/// well defined.
pub fn construct_output(
    game: &BimatrixGame,
    certificate: &StationaryCertificate,
    duals: &DualSolution,
    params: &ConstructParams,
    config: &SolverConfig,
) -> Result<ConstructionTrace> {
    let stationary = &certificate.profile;
    let mut candidates = Vec::new();
    let mut push = |profile: StrategyProfile, description: &str| -> Result<()> {
        let report = game.regret_report(&profile)?;
        candidates.push(Candidate {
            profile,
            report,
            description: description.to_string(),
        });
        Ok(())
    };
    push(stationary.clone(), "(x_s, y_s)")?;

    let mut case4 = None;
    let mut case5 = None;
    let case_label = if duals.is_degenerate() {
        CaseLabel::DegenerateDual
    } else if params.lambda <= 0.0 || params.mu <= 0.0 {
        CaseLabel::LambdaMuNonpositive
    } else {
        push(
            StrategyProfile::new(duals.w.clone(), duals.z.clone())?,
            "(w, z)",
        )?;
        match dispatch_case(params) {
            Case::One => CaseLabel::One,
            Case::Two => CaseLabel::Two,
            Case::Three => CaseLabel::Three,
            Case::Four => {
                let p4 = compute_case4_params(game, stationary, duals, params)?;
                let (profile, desc) = case4_candidate(&p4, duals)?;
                push(profile, desc)?;
                let label = if p4.p.is_some() {
                    CaseLabel::FourOne
                } else {
                    CaseLabel::FourTwo
                };
                case4 = Some(p4);
                match compute_case5_params(game, stationary, duals, params) {
                    Ok(p5) => {
                        let (profile, desc) = case5_candidate(&p5, duals)?;
                        push(profile, desc)?;
                        case5 = Some(p5);
                    }
                    Err(e) => debug!("mirrored candidate skipped: {e}"),
                }
                label
            }
            Case::Five => {
                let p5 = compute_case5_params(game, stationary, duals, params)?;
                let (profile, desc) = case5_candidate(&p5, duals)?;
                push(profile, desc)?;
                let label = if p5.p.is_some() {
                    CaseLabel::FiveOne
                } else {
                    CaseLabel::FiveTwo
                };
                case5 = Some(p5);
                match compute_case4_params(game, stationary, duals, params) {
                    Ok(p4) => {
                        let (profile, desc) = case4_candidate(&p4, duals)?;
                        push(profile, desc)?;
                        case4 = Some(p4);
                    }
                    Err(e) => debug!("mirrored candidate skipped: {e}"),
                }
                label
            }
        }
    };

    let mut chosen_index = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.report.max_regret < candidates[chosen_index].report.max_regret {
            chosen_index = i;
        }
    }
    let trace = ConstructionTrace {
        case_label,
        lambda: params.lambda,
        mu: params.mu,
        p_mass: duals.p_mass,
        case4,
        case5,
        candidates,
        chosen_index,
    };

    let bound = 1.0 / 3.0 + config.delta + GUARANTEE_SLACK;
    let achieved = trace.chosen().report.max_regret;
    if achieved > bound {
        return Err(Error::GuaranteeViolation {
            max_regret: achieved,
            bound,
            trace: Box::new(trace),
        });
    }
    Ok(trace)
}
