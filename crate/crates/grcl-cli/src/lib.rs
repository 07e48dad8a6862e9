//! Experiment harness: `P(k)` sweeps written as CSV and verification suites.

pub mod config;
pub mod sweep;
pub mod verify;

/// Errors surfaced by the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Library(#[from] grcl::Error),
    #[error("verification could not run: {0}")]
    Check(String),
}

impl CliError {
    /// Process exit code; check failures use 1 and are reported separately.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Caps the global worker pool at `GRCL_THREADS` when the variable is set.
pub fn init_thread_pool() -> Result<(), CliError> {
    match std::env::var("GRCL_THREADS") {
        Ok(v) => {
            let threads: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| CliError::Config(format!("GRCL_THREADS must be a positive integer, got `{v}`")))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
        }
        Err(_) => Ok(()),
    }
}
