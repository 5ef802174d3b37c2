//! Command-line driver: snapshot generation, threshold calibration,
//! strategy evaluation and analysis reports, all reproducible from
//! `(config file + flags + seed)`.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn runtime(error: anyhow::Error) -> Self {
        CliError::Runtime(error)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        CliError::Runtime(error)
    }
}

#[derive(Parser)]
#[command(
    name = "tvr",
    version,
    about = "Highway V2V relay simulation: snapshots, channel model, relay strategies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic highway snapshot and write it as CSV
    Generate(CommonArgs),
    /// Calibrate the tall-vehicle distance threshold over a power sweep
    Calibrate(CommonArgs),
    /// Compare relay strategies: best-route shares, obstructions, usage
    Evaluate(CommonArgs),
    /// Emit LOS-ratio, availability, PDR and effective-range CSVs
    Analyze(CommonArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Flat key=value config file; command-line flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// RNG seed (required, here or in the config file)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for reports (default: out)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Traffic density: low | medium | high | vehicles per km per lane
    #[arg(long)]
    pub density: Option<String>,

    /// Transmit power in dBm; repeat for a sweep
    #[arg(long = "power")]
    pub power: Vec<f64>,

    /// Source-destination pairs per snapshot
    #[arg(long)]
    pub pairs: Option<usize>,

    /// Tall-vehicle distance-difference threshold in meters
    #[arg(long)]
    pub xmax: Option<f64>,

    /// Shadowing spread in dB (0 = deterministic threshold)
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Number of generated snapshots
    #[arg(long)]
    pub snapshots: Option<usize>,

    /// Comma-separated strategy list: farthest,most_new,tvr
    #[arg(long)]
    pub strategies: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    use config::CommandDefaults;
    match cli.command {
        Command::Generate(args) => {
            let cfg = config::resolve(
                &args,
                CommandDefaults {
                    powers: vec![10.0],
                    pairs: 2000,
                    snapshots: 1,
                    sigma: 0.0,
                },
            )?;
            commands::cmd_generate(&cfg)
        }
        Command::Calibrate(args) => {
            let cfg = config::resolve(
                &args,
                CommandDefaults {
                    powers: (1..=20).map(f64::from).collect(),
                    pairs: 400,
                    snapshots: 3,
                    sigma: 0.0,
                },
            )?;
            commands::cmd_calibrate(&cfg)
        }
        Command::Evaluate(args) => {
            let cfg = config::resolve(
                &args,
                CommandDefaults {
                    powers: vec![5.0, 10.0, 15.0],
                    pairs: 2000,
                    snapshots: 10,
                    sigma: 0.0,
                },
            )?;
            commands::cmd_evaluate(&cfg)
        }
        Command::Analyze(args) => {
            let cfg = config::resolve(
                &args,
                CommandDefaults {
                    powers: vec![10.0],
                    pairs: 2000,
                    snapshots: 8,
                    sigma: 3.0,
                },
            )?;
            commands::cmd_analyze(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(error)) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
