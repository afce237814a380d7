use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = rkout_cli::Cli::parse();
    match rkout_cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
