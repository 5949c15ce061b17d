use std::process::ExitCode;

use clap::Parser;
use packbound::{classify, reason_line, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", reason_line(&err));
            ExitCode::from(classify(&err).exit_code())
        }
    }
}
