//! Command-line front end: argument parsing, result files, exit codes.

pub mod args;
pub mod output;
pub mod run;

use clap::Parser;

pub use args::Cli;
pub use run::{CliError, ResultEnvelope, RunConfig};

/// Sizes the global worker pool from `BREMS_THREADS` when set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("BREMS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("BREMS_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { run::EXIT_USAGE } else { run::EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return run::EXIT_USAGE;
    }
    let mut out = String::new();
    let result = run::run(cli, &mut out);
    print!("{out}");
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
