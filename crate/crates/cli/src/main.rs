//! `fbplab`: well-posedness analysis and residual-velocity runs for 2+2
//! elliptic free-boundary problems.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 ill-posed,
//! 3 degenerate interface system.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;

#[derive(Parser)]
#[command(name = "fbplab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the interface system and rank residual velocities.
    Analyze(Common),
    /// Run the residual-velocity iteration to steady state.
    Solve(Common),
    /// Reproduce the grid-refinement and timestep-stability tables.
    Tables {
        #[command(flatten)]
        common: Common,
        /// Only run the 10x10 and 20x20 grids.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(common: &Common) -> Result<Config, error::CliError> {
    let mut config = Config::load(common.config.as_deref())?;
    if let Some(out) = &common.out {
        config.output.directory = Some(out.clone());
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap reports usage errors with status 2, which is reserved here.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Analyze(common) => load(common).and_then(|c| commands::analyze(&c)),
        Command::Solve(common) => load(common).and_then(|c| commands::solve(&c)),
        Command::Tables { common, quick } => {
            load(common).and_then(|c| commands::tables(&c, *quick))
        }
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
