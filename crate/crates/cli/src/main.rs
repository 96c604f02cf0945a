use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use markov_matern_cli::commands;
use markov_matern_cli::config::{Cli, CliError, CliResult, RunConfig};

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = RunConfig::from_cli(cli)?;
    let table = commands::run(&cfg)?;
    match &cfg.out {
        Some(path) => table.write(BufWriter::new(File::create(path)?))?,
        None => table.write(io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream reader closed early, e.g. `| head`
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("markov-matern: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
