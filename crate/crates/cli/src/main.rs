//! Command-line front end: spectrum simulation, cluster convergence
//! studies, the radical gap pipeline, and input validation.
//!
//! Every failure prints a single diagnostic line `ERROR[code]: message`:
//! 1 = input or configuration problem, 2 = capacity exceeded,
//! 3 = RPA instability, 4 = a check escalated by --strict.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_INSTABILITY: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_PARSE, message: message.into() }
    }

    pub fn strict(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_STRICT, message: message.into() }
    }
}

impl From<spinsim::Error> for CliError {
    fn from(e: spinsim::Error) -> CliError {
        let code = match &e {
            spinsim::Error::CapacityExceeded { .. }
            | spinsim::Error::ClusterTooLarge { .. }
            | spinsim::Error::ExhaustiveTooLarge { .. } => EXIT_CAPACITY,
            spinsim::Error::GridExcludesLines(_) => EXIT_STRICT,
            _ => EXIT_PARSE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<rpa_gap::RpaError> for CliError {
    fn from(e: rpa_gap::RpaError) -> CliError {
        let code = match &e {
            rpa_gap::RpaError::Instability(_) | rpa_gap::RpaError::NoModes => EXIT_INSTABILITY,
            rpa_gap::RpaError::DimensionOverflow { .. } => EXIT_CAPACITY,
            _ => EXIT_PARSE,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "spinsim", version, about = "NMR spin-dynamics spectra and diradical singlet-triplet gaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a 1D spectrum from a spin-system JSON file.
    Simulate(SimulateArgs),
    /// Cluster-size convergence study: L1 distances between successive sizes.
    Converge(ConvergeArgs),
    /// Singlet-triplet gap from an electron-integral file.
    RpaGap(RpaGapArgs),
    /// Check an input file without producing artifacts.
    Validate(ValidateArgs),
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Spin-system JSON file.
    pub input: PathBuf,
    /// exact | cluster | symmetry | sampled.
    #[arg(long)]
    pub solver: Option<String>,
    /// Isotope to detect (default: the most abundant in the system).
    #[arg(long)]
    pub detect: Option<String>,
    /// Lorentzian FWHM in Hz (default 10).
    #[arg(long)]
    pub broadening_hz: Option<f64>,
    #[arg(long)]
    pub max_cluster_size: Option<usize>,
    #[arg(long)]
    pub weight_threshold: Option<f64>,
    /// Sample count for the sampled solver, or `exhaustive`.
    #[arg(long)]
    pub samples: Option<String>,
    /// RNG seed; required by the sampled solver.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results are identical for any value.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Escalate warnings (grid coverage, validity) to errors.
    #[arg(long)]
    pub strict: bool,
    /// Spectrum CSV path (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the stick spectrum JSON here.
    #[arg(long)]
    pub sticks: Option<PathBuf>,
    /// Also write the peak-table JSON here.
    #[arg(long)]
    pub peaks: Option<PathBuf>,
    /// key = value config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ConvergeArgs {
    pub input: PathBuf,
    /// Comma-separated cluster sizes, e.g. 6,8,10.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub detect: Option<String>,
    #[arg(long)]
    pub broadening_hz: Option<f64>,
    #[arg(long)]
    pub weight_threshold: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RpaGapArgs {
    /// Electron-integral file (extended FCIDUMP).
    pub input: PathBuf,
    /// Also run the truncated-boson oracle at this truncation.
    #[arg(long)]
    pub boson_max: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fail (exit 4) when the validity ratios exceed the threshold.
    #[arg(long)]
    pub strict: bool,
    /// Gap report JSON path (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ValidateArgs {
    pub input: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let first_line = e.to_string().lines().next().unwrap_or("bad usage").to_string();
            eprintln!("ERROR[{EXIT_PARSE}]: {first_line}");
            std::process::exit(EXIT_PARSE);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Converge(args) => commands::converge(args),
        Command::RpaGap(args) => commands::rpa_gap(args),
        Command::Validate(args) => commands::validate(args),
    };
    if let Err(e) = result {
        eprintln!("ERROR[{}]: {}", e.code, e.message);
        std::process::exit(e.code);
    }
}
