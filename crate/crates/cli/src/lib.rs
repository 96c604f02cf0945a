//! Command-line harness for markov-matern: reproduces the covariance,
//! prediction and KL studies at desk scale and writes CSV.

pub mod commands;
pub mod config;
pub mod output;
pub mod studies;

use clap::Parser;

use config::{Cli, CliResult, RunConfig};
use output::Table;

/// Parses arguments (including the program name) and runs the subcommand.
pub fn run_args<I, T>(args: I) -> CliResult<(RunConfig, Table)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| config::CliError::Config(e.to_string()))?;
    let cfg = RunConfig::from_cli(&cli)?;
    let table = commands::run(&cfg)?;
    Ok((cfg, table))
}
