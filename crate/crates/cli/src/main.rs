//! Command-line surface: simulation, fitting, the three experiment
//! protocols and data-file inspection, with config-file support and
//! deterministic outputs.

mod commands;
mod config;
mod output;
mod quantity;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Config, Overrides};

/// Errors sorted by exit code: validation 2, fit 3, I/O 4.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Fit(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Validation(msg) => write!(f, "validation error: {msg}"),
            Self::Fit(msg) => write!(f, "fit error: {msg}"),
            Self::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Fit(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<cavimag_core::io::IoError> for CliError {
    fn from(e: cavimag_core::io::IoError) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<cavimag_core::fit::FitError> for CliError {
    fn from(e: cavimag_core::fit::FitError) -> Self {
        Self::Fit(e.to_string())
    }
}

impl From<cavimag_core::model::ModelError> for CliError {
    fn from(e: cavimag_core::model::ModelError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<cavimag_core::sweep::SweepError> for CliError {
    fn from(e: cavimag_core::sweep::SweepError) -> Self {
        match e {
            cavimag_core::sweep::SweepError::Fit(inner) => Self::Fit(inner.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cavimag",
    version,
    about = "Transmission modeling and parameter extraction for remotely coupled \
             cavity-magnon systems"
)]
struct Cli {
    /// Config file (TOML with unit-suffixed values).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides config and CAVIMAG_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for sweeps; 0 uses all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Noise seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Synthetic-noise RMS override.
    #[arg(long, global = true)]
    noise_sigma: Option<f64>,

    /// Validate the configuration and print the effective settings
    /// without computing or writing anything.
    #[arg(long, global = true)]
    dry_run: bool,

    /// Override a config value: --set system.cavity.f_c="6.2 GHz"
    /// (repeatable; flags win over the file).
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-model a transmission spectrum and its group delay.
    Simulate,
    /// Run a fitting pipeline on measured or synthetic spectra.
    Fit,
    /// Reproduce one of the experiment protocols (spacing, phase, field).
    Experiment,
    /// Inspect a data file (Touchstone or CSV) and validate it.
    Parse {
        /// File to inspect.
        file: PathBuf,
        /// Force the interpretation: touchstone | spectrum | calibration.
        #[arg(long)]
        kind: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        set: cli.set.clone(),
        seed: cli.seed,
        noise_sigma: cli.noise_sigma,
        out_dir: cli.out_dir.clone(),
        jobs: cli.jobs,
    };
    let config = Config::load(cli.config.as_deref(), &overrides)?;

    if config.jobs > 0 {
        // Bounded data parallelism for the sweep engines; results are
        // identical to sequential evaluation.
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
    }

    match &cli.command {
        Command::Simulate => commands::simulate::run(&config, cli.dry_run),
        Command::Fit => commands::fitcmd::run(&config, cli.dry_run),
        Command::Experiment => commands::experiment::run(&config, cli.dry_run),
        Command::Parse { file, kind } => {
            commands::parsecmd::run(&config, file, kind.as_deref(), cli.dry_run)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("cavimag: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
