mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// 2 for configuration problems, 3 for bad or missing data, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<pensemble_core::Error>() {
        return match e {
            pensemble_core::Error::Config(_) => 2,
            e if e.is_data_error() => 3,
            _ => 1,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => run::gen(a),
        Command::Run(a) => run::run(*a),
        Command::Report(a) => run::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
