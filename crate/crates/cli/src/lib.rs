//! Command-line front end: simulation, scalograms, estimation, asymptotic
//! tables, tuning advice and the Monte Carlo study.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parse;
pub mod reproduce;

use std::ffi::OsString;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate_cmd(a, cli.format),
        Command::Scalogram(a) => commands::scalogram_cmd(a, cli.format),
        Command::Estimate(a) => commands::estimate_cmd(a, cli.format),
        Command::Asymptotics(a) => commands::asymptotics_cmd(a, cli.format),
        Command::Advise(a) => commands::advise_cmd(a, cli.format),
        Command::Reproduce(a) => reproduce::reproduce_cmd(a, cli.format),
    }
}

/// Run with the given arguments and return the process exit code.
pub fn run(argv: Vec<OsString>) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("locmem: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("locmem: {e}");
            e.exit_code()
        }
    }
}
