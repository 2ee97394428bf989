//! `casimir`: tables, derivations and numeric checks for curved Casimir
//! operators.
//!
//! Exit status: 0 all checks pass, 1 a check failed, 2 invalid
//! configuration, 3 derivation failure.

mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let result = commands::run(&cli).and_then(|r| {
        r.emit(cli.format, cli.out.as_deref())?;
        Ok(r.passed())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
