//! `obw`: command-line driver for the weighted Ostrowski bound library.
//!
//! Exit codes: 0 success, 1 computation failure (including failed
//! verification), 2 usage error.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{resolve, Cli, TOL_ENV};
use error::CliError;

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli.command.name(), cli.command.flags(), std::env::var(TOL_ENV).ok())?;
    let outcome = commands::run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &outcome.bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&outcome.bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))?;
        }
    }
    if let Some(note) = &outcome.note {
        eprintln!("{note}");
    }
    if outcome.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("obw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
