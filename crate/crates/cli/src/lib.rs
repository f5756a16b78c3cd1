//! Batch driver: JSON-configured `construct`, `verify`, `evolve` and `oracle` runs
//! producing a check report and optional CSV/JSON tables.

pub mod commands;
pub mod config;
pub mod report;
pub mod table;

use std::path::PathBuf;

pub use commands::{run_construct, run_evolve, run_oracle, run_verify, verify_with, Output};
pub use config::RunConfig;
pub use report::{Record, Report, Status};
pub use table::{Format, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 2 for configuration and IO problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<krein::Error> for CliError {
    fn from(e: krein::Error) -> Self {
        use krein::Error as E;
        match e {
            E::EndpointSingularity { .. }
            | E::NotInGap { .. }
            | E::NotInSpectralSet { .. }
            | E::InvalidGrid(_)
            | E::InvalidGapSet(_)
            | E::InvalidProfile(_)
            | E::InvalidPotential(_)
            | E::NotUpperHalfPlane { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Construct,
    Verify,
    Evolve,
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Verify => "verify",
            Command::Evolve => "evolve",
            Command::Oracle => "oracle",
        }
    }
}

/// Everything the flags contribute to a run.
#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: Option<u64>,
}

/// Loads the config, runs `command` and writes tables plus `report.json` into `--out`.
pub fn execute(command: Command, args: &RunArgs) -> Result<Report, CliError> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    cfg.check_command(command.name())?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let output = match command {
        Command::Construct => run_construct(&cfg)?,
        Command::Verify => run_verify(&cfg)?,
        Command::Evolve => run_evolve(&cfg)?,
        Command::Oracle => run_oracle(&cfg)?,
    };
    if let Some(dir) = &args.out {
        output.write(dir, args.format)?;
    }
    Ok(output.report)
}
