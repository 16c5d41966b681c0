//! `hepp`: command-line front end for hepp-core.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation
//! error.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hepp_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let report = match &cli.command {
        Command::Purify(a) => commands::purify(a)?,
        Command::Sweep(a) => commands::sweep(a)?,
        Command::Thresholds(a) => commands::thresholds(a)?,
        Command::Efficiency(a) => commands::efficiency(a)?,
        Command::Verify(a) => commands::verify(a)?,
        Command::Iterate(a) => commands::iterate_rounds(a)?,
    };
    let text = match cli.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => report.table.to_json(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
        }
    }
    Ok(!report.failed)
}

fn main() -> ExitCode {
    let argv = match args::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
