//! Library side of the `cmc-scri` command: configuration loading and the
//! subcommands, each writing its artifacts into the output directory.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{CutSpec, RunConfig};
pub use error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CMC_SCRI_THREADS";

/// Installs the global thread pool from `CMC_SCRI_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} = `{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
