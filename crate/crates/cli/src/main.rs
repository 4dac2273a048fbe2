mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::{error_code, error_json, error_kind, run, INPUT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{}", error_json("usage", e.to_string().trim()));
            return ExitCode::from(INPUT);
        }
    };
    match run(&cli.command, &cli.config) {
        Ok(out) => {
            let written = match &cli.config.out {
                Some(path) => std::fs::write(path, &out.body),
                None => std::io::stdout().write_all(out.body.as_bytes()),
            };
            if let Err(e) = written {
                eprint!("{}", error_json("io", &e.to_string()));
                return ExitCode::from(INPUT);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprint!("{}", error_json(error_kind(&e), &e.to_string()));
            ExitCode::from(error_code(&e))
        }
    }
}
