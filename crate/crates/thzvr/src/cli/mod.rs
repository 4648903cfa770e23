//! Command-line front end: config loading, analysis, simulation and figure sweeps.

mod analyze;
mod output;
mod reproduce;
mod simulate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

pub use analyze::{guaranteed_report, tail_report, GuaranteedReport, TailReport};
pub use reproduce::{figure, Curve, Figure, FigureId};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "THZVR_SEED";

const DEFAULT_PRESET: &str = "table2_1thz";

#[derive(Debug, Parser)]
#[command(
    name = "thzvr",
    version,
    about = "Delay and reliability analysis for VR over THz small cells"
)]
pub struct Cli {
    /// TOML configuration file with [channel], [blockage], [queues] and [sim] sections.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Shipped preset: table2_1thz or table2_0p2thz.
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the validated configuration and its hash.
    Config,
    /// Closed-form and numerical analysis.
    Analyze(AnalyzeArgs),
    /// Monte Carlo sessions.
    Simulate(SimulateArgs),
    /// Sweep one figure's x-axis and write plot-ready CSV.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Tail,
    GuaranteedLos,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum, default_value = "tail")]
    pub mode: Mode,
    /// Delay thresholds in seconds; defaults to sim.deltas.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Confidence levels for VaR and TVaR.
    #[arg(
        long = "alpha-c",
        value_delimiter = ',',
        default_value = "0.9,0.95,0.99"
    )]
    pub alpha_c: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sidecar for the end-to-end CDF grid in guaranteed-los mode.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Aggregate,
    Traces,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "aggregate")]
    pub emit: Emit,
    /// Keep the serving link in line of sight throughout.
    #[arg(long)]
    pub guaranteed_los: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: FigureId,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Config => output::echo_config(&config),
        Command::Analyze(a) => analyze::cmd_analyze(&config, a),
        Command::Simulate(a) => simulate::cmd_simulate(&config, a),
        Command::Reproduce(a) => reproduce::cmd_reproduce(&config, a),
    }
}

/// Loads the config or preset and applies the seed from the environment.
pub fn load_config(cli: &Cli) -> Result<NetworkConfig> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), _) => NetworkConfig::from_path(path)?,
        (None, Some(name)) => NetworkConfig::preset(name)?,
        (None, None) => NetworkConfig::preset(DEFAULT_PRESET)?,
    };
    if let Some(seed) = env_seed()? {
        log::info!("{SEED_ENV} overrides sim.seed with {seed}");
        config.sim.seed = seed;
    }
    Ok(config)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Parse {
            line: 1,
            message: format!("{SEED_ENV} must be an unsigned integer, got {v:?}"),
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Parse {
            line: 1,
            message: format!("{SEED_ENV}: {e}"),
        }),
    }
}
