//! Command-line experiments for [`compound_feedback`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
mod error;

pub use config::{Experiment, ExperimentConfig, FamilySpec, Outputs, RateSpec, SEED_ENV};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "compound-sim", version, about = "Feedback coding over finite compound channels")]
pub struct Cli {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override a config entry by dotted path, e.g. `--set n=[256,512]`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    /// Worker threads. Results do not depend on this.
    #[arg(long, default_value_t = 1, global = true)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacities, compound capacities and zero-rate exponents as JSON.
    Capacity {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaled exponent tradeoff of a BSC pair as CSV.
    PhiCurve {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = compound_feedback::analysis::DEFAULT_PHI_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo statistics per (n, channel) as CSV.
    Simulate {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every session transcript as JSON lines.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Exact single-epoch oracle against Monte Carlo, as a JSON report.
    OracleCheck {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower and upper exponent bounds at the configured rates, as JSON.
    Exponents {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "stdout".into(), source })
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Runs a parsed command line. `env_seed` is the value of [`SEED_ENV`].
pub fn run(cli: &Cli, env_seed: Option<&str>) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    pool.install(|| dispatch(cli, env_seed))
}

fn dispatch(cli: &Cli, env_seed: Option<&str>) -> Result<(), CliError> {
    if let Command::PhiCurve { p, points, out } = &cli.command {
        return emit(&commands::phi(*p, *points)?, out.as_deref());
    }
    let config = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides, env_seed)?;
    let exp = config.validate()?;
    let json_out = |out: &Option<PathBuf>| out.clone().or_else(|| exp.config.outputs.json.clone());
    match &cli.command {
        Command::PhiCurve { .. } => unreachable!("handled above"),
        Command::Capacity { out } => emit(&pretty(&commands::capacity(&exp)?), json_out(out).as_deref()),
        Command::Exponents { out } => emit(&pretty(&commands::exponents(&exp)?), json_out(out).as_deref()),
        Command::Simulate { out, transcripts } => {
            let tpath = transcripts.clone().or_else(|| exp.config.outputs.transcripts.clone());
            let cells = match &tpath {
                Some(p) => {
                    let file = std::fs::File::create(p).map_err(|source| CliError::Io {
                        path: p.display().to_string(),
                        source,
                    })?;
                    let mut w = std::io::BufWriter::new(file);
                    let cells = commands::simulate(&exp, Some(&mut w))?;
                    w.flush().map_err(|source| CliError::Io {
                        path: p.display().to_string(),
                        source,
                    })?;
                    cells
                }
                None => commands::simulate(&exp, None)?,
            };
            let out = out.clone().or_else(|| exp.config.outputs.csv.clone());
            emit(&commands::simulate_csv(&cells), out.as_deref())
        }
        Command::OracleCheck { out } => {
            let (report, passed) = commands::oracle_check(&exp)?;
            emit(&pretty(&report), json_out(out).as_deref())?;
            if passed {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!("some |z| exceeds {}", commands::ORACLE_Z_LIMIT)))
            }
        }
    }
}
