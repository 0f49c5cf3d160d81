//! Command-line front end: argument parsing, artifact writing, and the
//! mapping from failures to process exit codes.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gridlaa_core::GridError;

pub use commands::{cmd_run, cmd_sweep, cmd_synth, cmd_threshold};

/// Environment variable giving the default artifact directory.
pub const OUT_DIR_ENV: &str = "GRIDLAA_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BREACH: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gridlaa",
    version,
    about = "Grid frequency dynamics under load-altering attacks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic 36-zone network for a seed.
    Synth(SynthArgs),
    /// Simulate one scenario and write trace, metrics, events and plot.
    Run(RunArgs),
    /// Bisect for the smallest static attack that breaches a limit.
    Threshold(ThresholdArgs),
    /// Evaluate every cell of a sweep spec.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Artifact directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "gridlaa-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SimArgs {
    /// Integration step, s.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Simulated span, s.
    #[arg(long, default_value_t = 180.0)]
    pub horizon: f64,
    /// Integration steps per recorded sample.
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
}

impl SimArgs {
    pub fn config(&self) -> gridlaa_core::dynamics::SimulationConfig {
        gridlaa_core::dynamics::SimulationConfig {
            dt: self.dt,
            horizon: self.horizon,
            sample_every: self.sample_every,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Replace the network's BESS fleet with a named preset.
    #[arg(long)]
    pub bess: Option<String>,
    /// Exit with code 3 when the COI nadir falls below this frequency, Hz.
    #[arg(long, value_name = "HZ")]
    pub fail_on_breach: Option<f64>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub zone: String,
    /// Frequency limit, Hz.
    #[arg(long)]
    pub limit: f64,
    /// Search bracket in MW.
    #[arg(long, num_args = 2, required = true, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub bracket: Vec<f64>,
    #[arg(long, default_value = "none")]
    pub bess: String,
    /// Bisection tolerance, MW.
    #[arg(long, default_value_t = 1.0)]
    pub tol: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: GridError },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("nadir {nadir:.4} Hz breaches {limit} Hz")]
    Breach { nadir: f64, limit: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let grid = match self {
            CliError::Usage(_) | CliError::Io { .. } => return EXIT_VALIDATION,
            CliError::Breach { .. } => return EXIT_BREACH,
            CliError::Input { source, .. } | CliError::Grid(source) => source,
        };
        match grid {
            GridError::NumericalBlowUp { .. } | GridError::SingularSystem => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a).map(|_| ()),
        Command::Run(a) => cmd_run(&a).map(|_| ()),
        Command::Threshold(a) => cmd_threshold(&a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a).map(|_| ()),
    }
}
