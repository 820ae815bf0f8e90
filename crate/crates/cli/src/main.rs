mod args;
mod commands;
mod config;
mod error;

use args::{Cli, Command};
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::ListProtocols(a) => commands::list(a),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("qmac: {e}");
            e.exit_code()
        }
        // the panic message is already on stderr
        Err(_) => ExitCode::from(error::Kind::Internal.code()),
    }
}
