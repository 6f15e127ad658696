mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use casku::par::Execution;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid config, unwritable output.
    #[error("{0}")]
    Config(String),
    /// A protocol step refused during an honest run.
    #[error("{0}")]
    Abort(String),
}

impl From<casku_sim::SimError> for CliError {
    fn from(e: casku_sim::SimError) -> Self {
        match e {
            casku_sim::SimError::ConfigInvalid(m) => CliError::Config(m),
            other => CliError::Abort(other.to_string()),
        }
    }
}

impl From<casku_adversary::AdversaryError> for CliError {
    fn from(e: casku_adversary::AdversaryError) -> Self {
        CliError::Abort(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let res = match cli.command {
        Command::Demo(a) => commands::demo(&a),
        Command::Sweep(a) => commands::sweep(&a, exec),
        Command::Overhead(a) => commands::overhead(&a),
        Command::Attack(a) => commands::attack(&a, exec),
        Command::Keyupdate(a) => commands::keyupdate(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Abort(_)) => {
            eprintln!("casku: protocol abort: {e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("casku: {e}");
            ExitCode::from(2)
        }
    }
}
