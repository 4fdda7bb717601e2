//! Batch runs over a spec file, one CSV row per spec.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anash_core::SolverConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{exit, HarnessError, Result};
use crate::generate::{generate, Family, InstanceSpec};
use crate::run::{run_solve, RunRecord};

pub const CSV_VERSION_LINE: &str = "#anash-v1";

pub const COLUMNS: [&str; 12] = [
    "index",
    "instance",
    "status",
    "delta",
    "case_label",
    "achieved_epsilon",
    "iterations",
    "lambda",
    "mu",
    "P",
    "wall_time_ms",
    "error",
];

/// One non-comment line of a spec file.
#[derive(Clone, Debug)]
pub struct SpecLine {
    pub line: usize,
    pub text: String,
    pub spec: std::result::Result<InstanceSpec, String>,
}

/// Blank lines and lines starting with `#` are skipped. Relative
/// `from-file` paths resolve against `base`.
pub fn parse_specs(text: &str, base: &Path) -> Vec<SpecLine> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(k, l)| {
            let spec = l.parse::<InstanceSpec>().map(|mut s| {
                if let Family::FromFile { path } = &mut s.family {
                    if path.is_relative() {
                        *path = base.join(&*path);
                    }
                }
                s
            });
            SpecLine {
                line: k + 1,
                text: l.trim().to_owned(),
                spec,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum RowOutcome {
    Ok(RunRecord),
    Failed { code: u8, message: String },
}

#[derive(Clone, Debug)]
pub struct BatchRow {
    pub index: usize,
    pub outcome: RowOutcome,
    instance: String,
}

fn run_one(index: usize, line: &SpecLine, cfg: &SolverConfig, timing: bool) -> BatchRow {
    let attempt = match &line.spec {
        Err(msg) => Err(HarnessError::Usage(format!("line {}: {msg}", line.line))),
        Ok(spec) => generate(spec).and_then(|g| run_solve(&g, cfg, &line.text, timing)),
    };
    let outcome = match attempt {
        Ok((rec, _)) => RowOutcome::Ok(rec),
        Err(e) => RowOutcome::Failed {
            code: match &e {
                // a malformed spec line is an input error for the batch
                HarnessError::Usage(_) => exit::PARSE,
                other => other.exit_code(),
            },
            message: e.to_string(),
        },
    };
    BatchRow {
        index,
        outcome,
        instance: line.text.clone(),
    }
}

/// Solves every spec on the rayon pool; rows come back in spec order.
pub fn run_specs(specs: &[SpecLine], cfg: &SolverConfig, timing: bool) -> Vec<BatchRow> {
    specs
        .par_iter()
        .enumerate()
        .map(|(k, line)| run_one(k, line, cfg, timing))
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    index: usize,
    instance: &'a str,
    status: &'a str,
    delta: Option<f64>,
    case_label: Option<String>,
    achieved_epsilon: Option<f64>,
    iterations: Option<usize>,
    lambda: Option<f64>,
    mu: Option<f64>,
    #[serde(rename = "P")]
    p_mass: Option<f64>,
    wall_time_ms: Option<u64>,
    error: &'a str,
}

pub fn write_csv<W: Write>(rows: &[BatchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        let rec = match &row.outcome {
            RowOutcome::Ok(r) => CsvRow {
                index: row.index,
                instance: &row.instance,
                status: "ok",
                delta: Some(r.delta),
                case_label: Some(r.case_label.to_string()),
                achieved_epsilon: Some(r.achieved_epsilon),
                iterations: Some(r.iterations),
                lambda: Some(r.lambda),
                mu: Some(r.mu),
                p_mass: Some(r.p_mass),
                wall_time_ms: Some(r.wall_time_ms),
                error: "",
            },
            RowOutcome::Failed { message, .. } => CsvRow {
                index: row.index,
                instance: &row.instance,
                status: "error",
                delta: None,
                case_label: None,
                achieved_epsilon: None,
                iterations: None,
                lambda: None,
                mu: None,
                p_mass: None,
                wall_time_ms: None,
                error: message,
            },
        };
        w.serialize(rec).map_err(std::io::Error::other)?;
    }
    w.flush()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BatchSummary {
    pub rows: usize,
    pub failures: usize,
    pub max_epsilon: f64,
    pub mean_epsilon: f64,
    pub histogram: BTreeMap<String, usize>,
    /// Exit code of the first failed row in spec order.
    pub first_failure_code: Option<u8>,
}

impl BatchSummary {
    pub fn from_rows(rows: &[BatchRow]) -> Self {
        let mut s = BatchSummary {
            rows: rows.len(),
            ..Default::default()
        };
        let mut total = 0.0;
        for row in rows {
            match &row.outcome {
                RowOutcome::Ok(r) => {
                    total += r.achieved_epsilon;
                    s.max_epsilon = s.max_epsilon.max(r.achieved_epsilon);
                    *s.histogram.entry(r.case_label.to_string()).or_default() += 1;
                }
                RowOutcome::Failed { code, .. } => {
                    s.failures += 1;
                    s.first_failure_code.get_or_insert(*code);
                }
            }
        }
        let ok = s.rows - s.failures;
        if ok > 0 {
            s.mean_epsilon = total / ok as f64;
        }
        s
    }

    pub fn exit_code(&self) -> u8 {
        self.first_failure_code.unwrap_or(exit::SUCCESS)
    }
}

impl fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rows: {} ok, {} failed",
            self.rows - self.failures,
            self.failures
        )?;
        writeln!(
            f,
            "achieved epsilon: max {:.6}, mean {:.6}",
            self.max_epsilon, self.mean_epsilon
        )?;
        writeln!(f, "cases:")?;
        for (label, count) in &self.histogram {
            writeln!(f, "  {label:<22} {count}")?;
        }
        Ok(())
    }
}

/// Reads `specs_path`, solves everything and writes the CSV to `out_path`.
pub fn run_batch(
    specs_path: &Path,
    cfg: &SolverConfig,
    out_path: &Path,
    timing: bool,
) -> Result<BatchSummary> {
    let text = std::fs::read_to_string(specs_path).map_err(|e| HarnessError::io(specs_path, e))?;
    let base = specs_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(PathBuf::new);
    let specs = parse_specs(&text, &base);
    if specs.is_empty() {
        return Err(HarnessError::Usage(format!(
            "{} lists no instances",
            specs_path.display()
        )));
    }
    let rows = run_specs(&specs, cfg, timing);
    let file = std::fs::File::create(out_path).map_err(|e| HarnessError::io(out_path, e))?;
    write_csv(&rows, std::io::BufWriter::new(file)).map_err(|e| HarnessError::io(out_path, e))?;
    Ok(BatchSummary::from_rows(&rows))
}
