//! Batch CLI for the integral-operator laboratory.
//!
//! Exit codes: 0 success, 1 invalid configuration or argument, 2 numerical
//! failure. Nothing else.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let ok = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                mercerlab::Error::NumericalFailure(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
