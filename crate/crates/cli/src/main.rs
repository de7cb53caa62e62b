//! `latticefringe` — reproducible runs of the lattice interference models.
//!
//! Exit codes: 0 success, 1 config/usage error, 2 numeric failure, 3 I/O error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::Context;
use error::CliError;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "latticefringe", version, about = "Interference of independent condensates released from an optical lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config for the subcommand (unknown keys are rejected)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the seed in the config
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Output directory, created if missing
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true, value_name = "INT", env = "LATTICEFRINGE_WORKERS", default_value_t = 0)]
    workers: usize,

    /// Format of tabular outputs
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize one time-of-flight profile and fit it
    Simulate,
    /// Monte-Carlo ensemble of fitted fringe amplitudes and phases
    Ensemble,
    /// Extrema and first-harmonic content of F versus site count
    Scaling,
    /// Fit a profile CSV/JSON or a 2D image JSON
    Fit {
        /// Input file; overrides "input" in the config
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// 3D lattice extrema and line-of-sight integration
    Lattice3d,
    /// Print the physical scales of a configuration
    Scales,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = Context {
        config: cli.config.as_deref(),
        seed: cli.seed,
        out: &cli.out,
        workers: cli.workers,
        format: cli.format,
        started: Instant::now(),
    };
    let result = match &cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Ensemble => commands::ensemble(&ctx),
        Command::Scaling => commands::scaling(&ctx),
        Command::Fit { input } => commands::fit(&ctx, input.as_deref()),
        Command::Lattice3d => commands::lattice3d(&ctx),
        Command::Scales => commands::scales(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
