mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters or settings: exit 2.
    Usage(String),
    Lib(kumiw::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) if e.is_data_error() => 3,
            CliError::Lib(e) if e.is_numerical() => 4,
            CliError::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<kumiw::Error> for CliError {
    fn from(e: kumiw::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
