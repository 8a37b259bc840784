//! Library half of the `pogg` binary: argument types, commands, curve files
//! and run manifests.

pub mod args;
pub mod commands;
pub mod curve;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use args::{Cli, Command};
use clap::Parser;
use commands::Output;
use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<Output> {
    let out = match &cli.command {
        Command::SweepH(a) => commands::sweep_h(a),
        Command::Solve(a) => commands::solve(a),
        Command::Rsharp(a) => commands::rsharp(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Verify(a) => commands::verify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Reconcile(a) => commands::reconcile(a),
        Command::Explore(a) => commands::explore(a),
    }?;
    if let Some(log) = &cli.manifest_log {
        manifest::append_to_log(log, &out.manifest)?;
    }
    Ok(out)
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from_args<I, T>(args: I) -> CliResult<Output>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    run(&cli)
}
