//! `cuntz`: exact spectral computations for the Cuntz algebra.

mod cache;
mod commands;
mod config;
mod error;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::Source;
use crate::config::{Flags, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cuntz", version, about = "Exact spectral computations on the Cuntz algebra O_N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run the structural suite; exit 0 iff every verdict is verified.
    Verify,
    /// Eigenvalues with multiplicities, block by block.
    Spectrum,
    /// Partial heat traces with analytic tail bounds.
    HeatTrace,
    /// State values on the spanning family S_ρS_σ*.
    Frohlich,
    /// Singular values of commutators with S_1.
    Commutators,
    /// Adjudication report in JSON.
    Adjudicate,
    /// Human-readable summary of everything above.
    Report,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let src = Source::new(&cfg)?;
    let start = Instant::now();
    let out = match cli.command {
        Command::Verify => commands::verify(&cfg),
        Command::Spectrum => commands::spectrum(&cfg, &src),
        Command::HeatTrace => commands::heat_trace(&cfg, &src),
        Command::Frohlich => commands::frohlich(&cfg, &src),
        Command::Commutators => commands::commutators(&cfg),
        Command::Adjudicate => commands::adjudicate(&cfg),
        Command::Report => commands::report(&cfg, &src),
    };
    src.log_totals();
    log::info!("{:?} finished in {:.3} s", cli.command, start.elapsed().as_secs_f64());
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
