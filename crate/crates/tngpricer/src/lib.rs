//! Command-line batch front end for the TNG pricing engine.
//!
//! Reads a JSON scenario, runs one job and writes CSV reports plus a
//! `summary.json`. Exit codes: 0 success, 2 invalid input, 3 numerical
//! failure, 4 I/O.

pub mod cli;
pub mod commands;
mod error;
pub mod report;
pub mod scenario;

pub use error::{CliError, CliResult};

/// Runs a parsed command line; the return value is the process exit code.
pub fn run(cli: &cli::Cli) -> i32 {
    match commands::run_command(cli.command, &cli.options) {
        Ok(_) => 0,
        Err(err) => {
            eprintln!("tngpricer: {err}");
            err.exit_code()
        }
    }
}
