//! Command-line surface: every pipeline as a reproducible, config-driven
//! run that writes CSV/JSON plot data plus a human-readable summary into a
//! run directory. All angles are radians on disk; degrees appear only in
//! summaries.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qestkit", about = "phase / phase-diffusion estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Parser)]
struct CommonArgs {
    /// JSON config file; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the diffusion amplitude (collapses grids to one point).
    #[arg(long)]
    delta: Option<f64>,
    /// Overrides the splitting ratio of the four-outcome POVM.
    #[arg(long)]
    k: Option<f64>,
    /// Overrides the transmissivity.
    #[arg(long)]
    eta: Option<f64>,
    /// Overrides the N00N photon number.
    #[arg(long = "noon-n")]
    noon_n: Option<usize>,
    /// Overrides the Holland-Burnett photon number per port.
    #[arg(long = "hb-n")]
    hb_n: Option<usize>,
    /// Overrides the Fock cutoff.
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and numeric QFI over a diffusion grid.
    Qfi(CommonArgs),
    /// Double-homodyne Fisher information scan over diffusion (and loss).
    HomodyneScan(CommonArgs),
    /// Simulated-annealing frontier search.
    Anneal(CommonArgs),
    /// Synthetic detector tomography with Monte-Carlo error bars.
    Tomography(CommonArgs),
    /// Maximum-likelihood estimator simulation against the Cramer-Rao bound.
    Mle(CommonArgs),
    /// Random-POVM trade-off battery.
    TradeoffScan(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Qfi(args) => commands::run_qfi(&args),
        Command::HomodyneScan(args) => commands::run_homodyne_scan(&args),
        Command::Anneal(args) => commands::run_anneal(&args),
        Command::Tomography(args) => commands::run_tomography(&args),
        Command::Mle(args) => commands::run_mle(&args),
        Command::TradeoffScan(args) => commands::run_tradeoff_scan(&args),
    };
    match result {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
    Core(qestkit::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(_) => "core",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<qestkit::Error> for CliError {
    fn from(e: qestkit::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
