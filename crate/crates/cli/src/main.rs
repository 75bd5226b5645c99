use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use coherent_cli::commands::run;
use coherent_cli::config::Cli;
use coherent_cli::{CliError, EXIT_OK};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            return fail(&CliError::usage(line.trim_start_matches("error: ").trim()));
        }
    };

    let (outcome, path) = match run(&cli) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let written = match &path {
        Some(p) => std::fs::write(p, &outcome.body).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout().lock().write_all(&outcome.body).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        return fail(&CliError::io(msg));
    }
    ExitCode::from(outcome.exit_code as u8)
}
