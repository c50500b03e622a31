//! `osc`: solves, classifies and synthesizes dissipative oscillations from
//! flat parameter files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dissipative_osc::params::Config;
use dissipative_osc::Error;
use thiserror::Error as ThisError;

#[derive(Parser, Debug)]
#[command(name = "osc", version, about = "Dissipative oscillations and causal wave kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Parameter file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Number of grid points (overrides `points` in the config).
    #[arg(long, global = true)]
    points: Option<usize>,

    /// Integrator tolerance (overrides `tol` in the config).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Print the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Formula solution against direct integration.
    Solve,
    /// Sign classification of omega^2.
    Classify,
    /// Kernel family K_R with semigroup and support checks.
    Kernel,
    /// Spherical field snapshot G(r, t).
    Field,
    /// Built-in desk-scale validation suite.
    ValidateAll,
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid input: {0}")]
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::InvalidInput(_) | Error::ParameterDomain(_)) => 3,
            CliError::Input(_) | CliError::Io(_) => 3,
            CliError::Core(_) => 4,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Core(e) => {
                let dbg = format!("{e:?}");
                dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
            }
            CliError::Io(_) => "Io".into(),
            CliError::Input(_) => "InvalidInput".into(),
        }
    }
}

/// Options shared by every subcommand after merging flags into the config.
pub struct Run {
    pub cfg: Config,
    pub out: PathBuf,
    pub json: bool,
    pub guard_fraction: Option<f64>,
}

fn prepare(cli: &Cli) -> Result<Run, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(n) = cli.points {
        if n < 16 {
            return Err(CliError::Input(format!("--points must be at least 16, got {n}")));
        }
        cfg.set("points", n.to_string());
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
        cfg.set("tol", format!("{t:e}"));
    }
    let guard_fraction = match std::env::var("OSC_SEED_GUARD") {
        Ok(v) => Some(
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x >= 0.0 && x.is_finite())
                .ok_or_else(|| CliError::Input(format!("OSC_SEED_GUARD: '{v}' is not a non-negative number")))?,
        ),
        Err(_) => None,
    };
    std::fs::create_dir_all(&cli.out)?;
    Ok(Run { cfg, out: cli.out.clone(), json: cli.json, guard_fraction })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = prepare(&cli).and_then(|run| match cli.command {
        Command::Solve => commands::solve(&run),
        Command::Classify => commands::classify(&run),
        Command::Kernel => commands::kernel(&run),
        Command::Field => commands::field(&run),
        Command::ValidateAll => commands::validate_all(&run),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}
