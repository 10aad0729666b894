//! `sip`: verification suites and experiments for the open inclusion
//! process. Exit codes: 0 pass, 1 criterion failure, 2 config error,
//! 3 I/O error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "sip", version, about = "Open inclusion process: exact checks and hydrodynamic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact identities: duality, profiles, two-point function, lookdown, absorption times.
    Verify {
        /// TOML config, or a manifest.json to replay.
        config: PathBuf,
        /// Run only these blocks (repeatable or comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Also write the report and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicas from a perturbed profile against the heat equation.
    Hydro {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// One long stationary run against the discrete and continuum profiles.
    Hydrostatic {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Absorption-time and variance-bound tables over an N grid.
    Scan {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<bool> {
    let path = match &cli.command {
        Command::Verify { config, .. }
        | Command::Hydro { config, .. }
        | Command::Hydrostatic { config, .. }
        | Command::Scan { config, .. } => config,
    };
    let config = RunConfig::load(path)?;
    if let Some(jobs) = config.jobs {
        if jobs == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let outcome = match &cli.command {
        Command::Verify { only, out, .. } => commands::verify(&config, only, out.as_deref())?,
        Command::Hydro { out, .. } => commands::hydro(&config, out)?,
        Command::Hydrostatic { out, .. } => commands::hydrostatic(&config, out)?,
        Command::Scan { out, .. } => commands::scan(&config, out)?,
    };
    println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("sip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
