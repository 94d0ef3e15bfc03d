//! Command-line front end: `dphase <command> [flags]` or
//! `dphase --config run.json`.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{run, CliError};
use config::Command;

#[derive(Debug, Parser)]
#[command(name = "dphase", version, about = "Double-phase gap laboratory")]
struct Cli {
    /// JSON config mirroring the flags of one command.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn resolve(cli: Cli) -> Result<Command, CliError> {
    match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Command::from_config(&text).map_err(CliError::Config)
        }
        (None, Some(cmd)) => Ok(cmd),
        _ => Err(CliError::Config("give a command or --config".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli).and_then(|cmd| {
        let text = run(&cmd)?;
        match &cmd.output().out {
            Some(path) => std::fs::write(path, &text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string())),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error code={} message={:?}", e.code(), e.message());
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
