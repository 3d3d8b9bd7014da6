use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use logme_cli::{run_and_report, Cli, Failure, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default();
            let first = first.trim_start_matches("error: ");
            eprintln!("{}", Failure::new("InvalidArgument", first).to_json_line());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    ExitCode::from(run_and_report(&cli))
}
