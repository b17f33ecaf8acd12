use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = matchup_runner::cli::Cli::parse();
    matchup_runner::cli::init_logging(cli.verbose);
    match matchup_runner::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
