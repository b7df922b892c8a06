//! Batch runner: one subcommand per process, TOML config in, stamped CSV/JSON/SVG artifacts out.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod plot;
mod run;

pub use config::{Command, ConfigFile, ExperimentConfig, Lemma};
pub use error::{CliError, CliResult, ErrorRecord};
pub use run::{run, RunSummary};

/// Environment variable capping the worker count of the rayon pool.
pub const THREADS_ENV: &str = "SOLITON_LAB_THREADS";

/// Install the global rayon pool, honouring [`THREADS_ENV`].
pub fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // a pool may already exist when embedded (tests); the cap then does not apply
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}
