mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::output::OutDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

/// Superintegrable monopole systems on a curved background.
#[derive(Parser)]
#[command(name = "monopole", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Poisson brackets and independence rank at random points.
    Verify,
    /// Integrate trajectories and record drift of the integrals.
    Simulate,
    /// Bounded-orbit closure scan.
    Closure,
    /// Certify integer powers of S in the higher-order integral.
    Parity,
    /// Convert points between the monopole and Taub-NUT charts.
    Map,
    /// Parameters of the reduced 2D system.
    Reduce2d,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let out = OutDir::create(&cli.out)?;
    let outcome = match cli.command {
        Command::Verify => commands::verify(&cfg, &out),
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Closure => commands::closure(&cfg, &out),
        Command::Parity => commands::parity(&cfg, &out),
        Command::Map => commands::map(&cfg, &out),
        Command::Reduce2d => commands::reduce2d(&cfg, &out),
    }?;
    if !cli.quiet {
        let mut stdout = std::io::stdout().lock();
        for line in &outcome.summary {
            let _ = writeln!(stdout, "{line}");
        }
        let _ = writeln!(stdout, "{}", if outcome.passed { "PASS" } else { "FAIL" });
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("monopole: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
