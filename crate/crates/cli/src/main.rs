//! `fdesq` — pipeline driver: gradient checks, ingestion, screening,
//! synthesis, adjuster training, and backtesting from one TOML config.
//!
//! Exit codes: 0 success, 1 quality-gate failure, 2 usage/IO/config error.
//! Log verbosity comes from the `FDESQ_LOG` environment variable.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fdesq", version, about = "Event-driven stock prediction pipeline")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Input data directory override.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check analytic gradients against the finite-difference oracle
    Gradcheck {
        /// Perturb the analytic gradients first (exercises the failure path).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Normalize ticker CSVs and emit rolling-window training samples
    Ingest,
    /// Screen every ticker pair for correlated candidates
    Screen,
    /// Generate a synthetic event-driven market with its ground truth
    Simulate,
    /// Train the adversarial adjuster for the configured ticker
    Train,
    /// Walk-forward backtest: baseline versus adjusted
    Backtest,
}

fn run(cli: &Cli) -> fdesq_core::Result<i32> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.paths.out = out.clone();
    }
    if let Some(data) = &cli.data {
        config.paths.data = data.clone();
    }
    match cli.command {
        Command::Gradcheck { corrupt } => commands::cmd_gradcheck(&config, corrupt),
        Command::Ingest => commands::cmd_ingest(&config),
        Command::Screen => commands::cmd_screen(&config),
        Command::Simulate => commands::cmd_simulate(&config),
        Command::Train => commands::cmd_train(&config),
        Command::Backtest => commands::cmd_backtest(&config),
    }
}

fn main() -> ExitCode {
    let env = env_logger::Env::default().filter_or("FDESQ_LOG", "warn");
    env_logger::Builder::from_env(env).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
