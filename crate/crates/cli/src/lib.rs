//! Experiment harness behind the `blockmod` binary.

pub mod checks;
pub mod config;
pub mod detect;
pub mod karate;
pub mod plot;
pub mod sweep;

/// Bad arguments or configuration; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

/// Environment variable naming the worker-thread count.
pub const THREADS_ENV: &str = "BLOCKMOD_THREADS";
