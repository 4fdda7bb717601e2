//! Instance families and the spec lines that name them.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anash_core::BimatrixGame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HarnessError, Result};
use crate::format::{load_any, LoadOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    UniformRandom,
    /// Entries are 1 with probability `p`, else 0.
    WinLose {
        p: f64,
    },
    /// `C = 1 - R`.
    ConstantSum,
    /// A random cell `(i, j)` with `R_ij = C_ij = 1`, every other entry in `[0, 1)`.
    PlantedPureNe,
    /// Payoffs built around a pure equilibrium whose dual strategies tie with
    /// a second action, so that the stationary point lands with
    /// `min(λ, μ)` just above 1/2 and `max(λ, μ)` above 2/3.
    PlantedTie,
    FromFile {
        path: PathBuf,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::UniformRandom => "uniform-random",
            Family::WinLose { .. } => "win-lose",
            Family::ConstantSum => "constant-sum",
            Family::PlantedPureNe => "planted-pure-ne",
            Family::PlantedTie => "planted-tie",
            Family::FromFile { .. } => "from-file",
        }
    }
}

pub const DEFAULT_WIN_PROB: f64 = 0.5;

/// One instance: a family plus size and seed. `n` is ignored by `from-file`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self { family, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::WinLose { p } = self.family {
            if !(0.0..=1.0).contains(&p) {
                return Err(HarnessError::Usage(format!(
                    "win-lose p must lie in [0, 1], got {p}"
                )));
            }
        }
        if !matches!(self.family, Family::FromFile { .. }) && self.n < 2 {
            return Err(HarnessError::Usage(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// `family key=value ...`, e.g. `win-lose n=10 seed=3 p=0.3` or
/// `from-file path=games/pennies.txt`.
impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::FromFile { path } => write!(f, "from-file path={}", path.display()),
            Family::WinLose { p } => write!(f, "win-lose n={} seed={} p={p}", self.n, self.seed),
            fam => write!(f, "{} n={} seed={}", fam.name(), self.n, self.seed),
        }
    }
}

impl FromStr for InstanceSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut tokens = s.split_whitespace();
        let family = tokens.next().ok_or("empty spec")?;
        let mut n = None;
        let mut seed = None;
        let mut p = None;
        let mut path = None;
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{tok}`"))?;
            let bad = |e: &dyn fmt::Display| format!("bad value for {key}: {e}");
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(&e))?),
                "p" => p = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
                "path" => path = Some(PathBuf::from(value)),
                _ => return Err(format!("unknown key `{key}`")),
            }
        }
        let family = match family {
            "uniform-random" => Family::UniformRandom,
            "win-lose" => Family::WinLose {
                p: p.unwrap_or(DEFAULT_WIN_PROB),
            },
            "constant-sum" => Family::ConstantSum,
            "planted-pure-ne" => Family::PlantedPureNe,
            "planted-tie" => Family::PlantedTie,
            "from-file" => Family::FromFile {
                path: path.ok_or("from-file needs path=")?,
            },
            other => return Err(format!("unknown family `{other}`")),
        };
        let from_file = matches!(family, Family::FromFile { .. });
        let spec = InstanceSpec {
            n: match n {
                Some(n) => n,
                None if from_file => 0,
                None => return Err("missing n=".into()),
            },
            seed: seed.unwrap_or(0),
            family,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

/// Deterministic per `(family, n, seed)`.
pub fn generate(spec: &InstanceSpec) -> Result<BimatrixGame> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (r, c) = match &spec.family {
        Family::FromFile { path } => return load_any(path, &LoadOptions::default()),
        Family::UniformRandom => (uniform(&mut rng, n * n), uniform(&mut rng, n * n)),
        Family::WinLose { p } => {
            let mut draw = || {
                (0..n * n)
                    .map(|_| if rng.gen_bool(*p) { 1.0 } else { 0.0 })
                    .collect()
            };
            let r = draw();
            (r, draw())
        }
        Family::ConstantSum => {
            let r = uniform(&mut rng, n * n);
            let c = r.iter().map(|v| 1.0 - v).collect();
            (r, c)
        }
        Family::PlantedPureNe => {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let mut r = uniform(&mut rng, n * n);
            let mut c = uniform(&mut rng, n * n);
            r[i * n + j] = 1.0;
            c[i * n + j] = 1.0;
            (r, c)
        }
        Family::PlantedTie => return Ok(planted_tie(&mut rng, n, spec.seed % 2 == 1)?),
    };
    Ok(BimatrixGame::new(n, r, c)?)
}

/// `gen::<f64>()` samples `[0, 1)`.
fn uniform(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen::<f64>()).collect()
}

fn planted_tie(
    rng: &mut ChaCha8Rng,
    n: usize,
    transpose: bool,
) -> anash_core::Result<BimatrixGame> {
    let mut r: Vec<f64> = (0..n * n).map(|_| 0.5 * rng.gen::<f64>()).collect();
    let mut c: Vec<f64> = (0..n * n).map(|_| 0.5 * rng.gen::<f64>()).collect();
    let lambda = rng.gen_range(0.51..0.66);
    let mu = rng.gen_range(0.67..1.0);
    // (0, 0) is a pure equilibrium; row 1 ties with row 0 against column 0,
    // column 1 ties with column 0 against row 0
    r[0] = 1.0;
    r[n] = 1.0;
    r[1] = 1.0 - lambda;
    r[n + 1] = 1.0;
    c[0] = 1.0;
    c[1] = 1.0;
    c[n] = 1.0 - mu;
    c[n + 1] = 1.0;
    let g = BimatrixGame::new(n, r, c)?;
    Ok(if transpose { g.transposed() } else { g })
}
