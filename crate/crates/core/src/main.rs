use std::process::ExitCode;

use clap::Parser;
use molqa::cli::{error_record, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(cli.command.name(), &e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
