//! Command-line front end for the spectral capillary-fluid toolkit.
//!
//! Exit codes: 0 success, 1 analysis-negative (unstable equilibrium or a
//! failed check suite), 2 usage or malformed input, 3 runtime blow-up.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "korteweg", version, about = "Spectral analysis and simulation of compressible capillary fluids")]
struct Cli {
    /// Worker threads (default: available cores). Results do not depend on
    /// the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for every randomized input.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for commands that write files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Table output format (dispersion).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify linear stability of an equilibrium and print the asymptotics.
    Stability(commands::stability::StabilityArgs),
    /// Tabulate the eigenvalues of the per-mode symbol across wavenumbers.
    Dispersion(commands::dispersion::DispersionArgs),
    /// Integrate the nonlinear system from a config file.
    Simulate(commands::simulate::SimulateArgs),
    /// Besov norms and per-block breakdown of a stored field.
    Besov(commands::besov::BesovArgs),
    /// Run an inequality check suite (see `check --help` for names).
    Check(commands::check::CheckArgs),
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Stability(args) => commands::stability::run(args),
        Command::Dispersion(args) => {
            commands::dispersion::run(args, cli.format == OutputFormat::Json)
        }
        Command::Simulate(args) => commands::simulate::run(args, &cli.out, cli.seed),
        Command::Besov(args) => commands::besov::run(args),
        Command::Check(args) => commands::check::run(args, cli.seed.unwrap_or(42)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KORTEWEG_LOG", "warn"))
        .init();
    if let Some(threads) = cli.threads {
        // Ignore the error if a pool already exists (e.g. under tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
