//! Command-line front end for `pldos-core`: scene files, subcommands and
//! reproducible CSV output.

pub mod args;
pub mod commands;
pub mod output;
pub mod scene_file;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{run, CliError, RunConfig};

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pldos: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.common, |k| std::env::var(k).ok())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build()
        .map_err(|e| CliError::Parse(format!("--threads: {e}")))?;
    pool.install(|| run(&cli.command, &cli.common, &cfg))
}
