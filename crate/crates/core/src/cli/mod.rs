//! Command-line front end.

pub mod checks;
pub mod commands;
pub mod config;
pub mod csv;
pub mod reference;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::copula::Alpha1Formula;
pub use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "contagion", version, about = "Optimal investment under default contagion")]
pub struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of RK4 steps on [0, T].
    #[arg(long = "grid-steps", global = true)]
    pub grid_steps: Option<usize>,
    /// Master seed for the simulation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Auxiliary survival density formula: derived or paper.
    #[arg(long, global = true)]
    pub mode: Option<Alpha1Formula>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the cascade and write y0.csv, pi0.csv and diagonal.csv.
    Solve,
    /// Recompute a strategy table (1 or 2).
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
        id: u8,
        /// Append the published values and absolute deviations.
        #[arg(long)]
        compare: bool,
    },
    /// Write the curve data of a figure (1, 2 or 3).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
    },
    /// Monte-Carlo estimate of expected utility under the optimal strategy.
    Simulate {
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        antithetic: bool,
    },
    /// Run the invariant checks.
    Check {
        /// Paths for the Monte-Carlo consistency checks.
        #[arg(long)]
        paths: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Solver(String),
    Check(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Check(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Check(m) => write!(f, "check failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.0)
    }
}

/// Reads the config file (if any) and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(steps) = cli.grid_steps {
        cfg.steps = steps;
    }
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.formula = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match load_config(&cli).and_then(|cfg| commands::dispatch(&cli.command, &cfg)) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(CliError::Check(report)) => {
            print!("{report}");
            eprintln!("error: invariant checks failed");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
