use std::time::Instant;

use anash_core::oracle::certify;
use anash_core::{solve, BimatrixGame, CaseLabel, Solution, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MAX_ITERS_ENV: &str = "ANASH_MAX_ITERS";

/// Slack above 1/3 + δ allowed for floating-point error.
pub const GUARANTEE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub delta: f64,
    pub case_label: CaseLabel,
    /// Max regret of the returned profile, recomputed by `oracle::certify`.
    pub achieved_epsilon: f64,
    pub iterations: usize,
    pub lambda: f64,
    pub mu: f64,
    #[serde(rename = "P")]
    pub p_mass: f64,
    /// Zero unless timing was requested, so that batch output stays
    /// reproducible.
    pub wall_time_ms: u64,
}

pub fn guarantee_bound(delta: f64) -> f64 {
    1.0 / 3.0 + delta + GUARANTEE_SLACK
}

/// Config for `delta` with `ANASH_MAX_ITERS` applied.
pub fn config_from_env(delta: f64, seed: u64) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::new(delta).map_err(|e| HarnessError::Usage(e.to_string()))?;
    cfg.rng_seed = seed;
    if let Ok(v) = std::env::var(MAX_ITERS_ENV) {
        cfg.max_iterations = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&m| m > 0)
            .ok_or_else(|| {
                HarnessError::Usage(format!(
                    "{MAX_ITERS_ENV} must be a positive integer, got `{v}`"
                ))
            })?;
    }
    Ok(cfg)
}

/// Descent, dual, construction, then an independent certificate of the
/// returned profile.
pub fn run_solve(
    game: &BimatrixGame,
    cfg: &SolverConfig,
    instance: &str,
    timing: bool,
) -> Result<(RunRecord, Solution)> {
    let start = Instant::now();
    let sol = match solve(game, cfg) {
        Ok(s) => s,
        Err(e) => {
            dump_failure(instance, &e);
            return Err(e.into());
        }
    };
    let elapsed = start.elapsed().as_millis() as u64;
    let bound = guarantee_bound(cfg.delta);
    let (ok, report) = certify(game, sol.profile(), bound)?;
    if !ok {
        log::error!(
            "{instance}: trace {}",
            serde_json::to_string(&sol.trace).unwrap_or_default()
        );
        return Err(HarnessError::Guarantee {
            achieved: report.max_regret,
            bound,
        });
    }
    let record = RunRecord {
        instance: instance.to_owned(),
        delta: cfg.delta,
        case_label: sol.trace.case_label,
        achieved_epsilon: report.max_regret,
        iterations: sol.certificate.iterations_used,
        lambda: sol.params.lambda,
        mu: sol.params.mu,
        p_mass: sol.duals.p_mass,
        wall_time_ms: if timing { elapsed } else { 0 },
    };
    Ok((record, sol))
}

fn dump_failure(instance: &str, e: &anash_core::Error) {
    match e {
        anash_core::Error::GuaranteeViolation { trace, .. } => {
            log::error!(
                "{instance}: {e}; trace {}",
                serde_json::to_string(trace).unwrap_or_default()
            );
        }
        anash_core::Error::SolverFailure { last_iterate, .. } => {
            log::error!("{instance}: {e}; last iterate {last_iterate:?}");
        }
        _ => log::error!("{instance}: {e}"),
    }
}

/// The `--json` document: the construction trace plus the chosen profile
/// and its certified regret.
pub fn trace_json(record: &RunRecord, sol: &Solution) -> serde_json::Value {
    let mut doc = serde_json::to_value(&sol.trace).unwrap_or_default();
    if let Some(obj) = doc.as_object_mut() {
        let chosen = sol.profile();
        obj.insert(
            "chosen".into(),
            serde_json::json!({ "x": chosen.row.probs(), "y": chosen.col.probs() }),
        );
        obj.insert("achieved_epsilon".into(), record.achieved_epsilon.into());
        obj.insert("iterations".into(), record.iterations.into());
        obj.insert("delta".into(), record.delta.into());
    }
    doc
}
