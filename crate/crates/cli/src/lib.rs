//! Library behind the `fracdim` binary: argument and config resolution, the
//! `derivative`, `solve` and `rc` subcommands, and the `verify` suite.

pub mod args;
pub mod config;
pub mod error;
pub mod functions;
pub mod problem;
pub mod run;
pub mod verify;

use std::path::PathBuf;

pub use config::{resolve, RunConfig};
pub use error::{CliError, ExitStatus};
pub use run::{run, Report};

/// Parses `argv`, resolves the configuration and runs it. Output goes to
/// the configured target; notes and errors go to stderr.
pub fn main_with<I, T>(argv: I, env_output_dir: Option<PathBuf>) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Config
            } else {
                ExitStatus::Success
            };
        }
    };
    let outcome = resolve(cli, env_output_dir).and_then(|config| {
        let report = run(&config)?;
        for (target, bytes) in &report.outputs {
            target.write(bytes)?;
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("{note}");
            }
            report.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.status
        }
    }
}
