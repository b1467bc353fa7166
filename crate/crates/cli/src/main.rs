//! Binary entry point: parse the command line, run it, map failures to
//! exit codes (2 configuration, 3 numeric; clap itself exits 2 on usage
//! errors).

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = subnyq_cli::run::Cli::parse();
    match subnyq_cli::run::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
