use std::path::PathBuf;
use std::process::ExitCode;

use anash::batch::run_batch;
use anash::format::{load_any, load_profile, save_game, save_profile};
use anash::generate::{generate, Family, InstanceSpec, DEFAULT_WIN_PROB};
use anash::run::{config_from_env, guarantee_bound, run_solve, trace_json};
use anash::{exit, HarnessError, LoadOptions, Result};
use anash_core::descent::DEFAULT_DELTA;
use anash_core::oracle::{certify, support_enumeration, DEFAULT_MAX_N};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "anash",
    version,
    about = "Approximate Nash equilibria of bimatrix games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct InputFlags {
    /// Reject payoffs outside [0, 1] instead of rescaling them.
    #[arg(long)]
    strict: bool,
    /// Pad non-square games with zero-payoff dummy strategies.
    #[arg(long)]
    pad: bool,
}

impl From<InputFlags> for LoadOptions {
    fn from(f: InputFlags) -> Self {
        LoadOptions {
            strict: f.strict,
            pad: f.pad,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one game and certify the result.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the construction trace as JSON.
        #[arg(long)]
        json: bool,
        /// Also write the chosen profile to this file.
        #[arg(long)]
        profile_out: Option<PathBuf>,
        #[command(flatten)]
        input: InputFlags,
    },
    /// Generate an instance and write it in the text format.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Win probability for the win-lose family.
        #[arg(long, default_value_t = DEFAULT_WIN_PROB)]
        p: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve every spec in a file and write one CSV row per spec.
    Batch {
        #[arg(long)]
        specs: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Record wall-clock times (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Check that a profile is an eps-equilibrium of a game.
    Verify {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        input: InputFlags,
    },
    /// Exact equilibria by support enumeration (small games only).
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        input: InputFlags,
    },
}

fn fmt_probs(p: &[f64]) -> String {
    p.iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            file,
            delta,
            seed,
            json,
            profile_out,
            input,
        } => {
            let game = load_any(&file, &input.into())?;
            let cfg = config_from_env(delta, seed)?;
            let (record, sol) = run_solve(&game, &cfg, &file.display().to_string(), false)?;
            if let Some(path) = profile_out {
                save_profile(sol.profile(), &path)?;
            }
            if json {
                let doc = trace_json(&record, &sol);
                println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            } else {
                println!(
                    "case {}  epsilon {:.6}  (bound {:.6})",
                    record.case_label,
                    record.achieved_epsilon,
                    guarantee_bound(delta)
                );
                println!(
                    "iterations {}  lambda {:.6}  mu {:.6}  P {:.6}",
                    record.iterations, record.lambda, record.mu, record.p_mass
                );
                println!("x: {}", fmt_probs(sol.profile().row.probs()));
                println!("y: {}", fmt_probs(sol.profile().col.probs()));
            }
            Ok(exit::SUCCESS)
        }
        Command::Gen {
            family,
            n,
            seed,
            p,
            output,
        } => {
            let line = match family.as_str() {
                "win-lose" => format!("win-lose n={n} seed={seed} p={p}"),
                "from-file" => {
                    return Err(HarnessError::Usage(
                        "gen cannot use the from-file family".into(),
                    ))
                }
                other => format!("{other} n={n} seed={seed}"),
            };
            let spec: InstanceSpec = line.parse().map_err(HarnessError::Usage)?;
            debug_assert!(!matches!(spec.family, Family::FromFile { .. }));
            save_game(&generate(&spec)?, &output)?;
            Ok(exit::SUCCESS)
        }
        Command::Batch {
            specs,
            output,
            delta,
            timing,
        } => {
            let cfg = config_from_env(delta, 0)?;
            let summary = run_batch(&specs, &cfg, &output, timing)?;
            print!("{summary}");
            Ok(summary.exit_code())
        }
        Command::Verify {
            game,
            profile,
            eps,
            input,
        } => {
            let g = load_any(&game, &input.into())?;
            let p = load_profile(&profile)?;
            let (ok, report) = certify(&g, &p, eps)?;
            println!(
                "row regret {:.9}  column regret {:.9}  max {:.9}",
                report.row_regret, report.col_regret, report.max_regret
            );
            if ok {
                println!("ok: {eps}-equilibrium");
                Ok(exit::SUCCESS)
            } else {
                println!("not an {eps}-equilibrium");
                Ok(exit::GUARANTEE)
            }
        }
        Command::Oracle { file, input } => {
            let g = load_any(&file, &input.into())?;
            if g.n() > DEFAULT_MAX_N {
                return Err(HarnessError::Usage(format!(
                    "support enumeration is limited to n <= {DEFAULT_MAX_N}, game has n = {}",
                    g.n()
                )));
            }
            let eqs = support_enumeration(&g, DEFAULT_MAX_N)?;
            println!("{} equilibria", eqs.len());
            for e in &eqs {
                println!("x: {}", fmt_probs(e.profile.row.probs()));
                println!("y: {}", fmt_probs(e.profile.col.probs()));
            }
            Ok(exit::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("anash: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
