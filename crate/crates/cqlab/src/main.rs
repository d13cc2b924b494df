use std::process::ExitCode;

use clap::Parser;
use cqlab::{init_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
