use std::process::ExitCode;

use clap::Parser;
use hamdd_cli::{run_and_write, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_and_write(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hamdd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
