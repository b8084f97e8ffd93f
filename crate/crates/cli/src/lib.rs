//! Library half of the command-line front end: configuration parsing,
//! the moment-table CSV format, verification reports and table merging.
//! The binary in `main.rs` is a thin clap wrapper over these.

pub mod config;
pub mod report;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or unreadable/unparsable inputs (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// Verification ran and failed (exit 1).
    #[error("verification failed: {0} check(s) did not pass")]
    VerificationFailed(usize),
    /// Computation error surfaced from the core crate (exit 2).
    #[error(transparent)]
    Core(#[from] ubmlab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed(_) => 1,
            _ => 2,
        }
    }
}

/// Full-precision scientific notation (17 significant digits) so that
/// downstream comparisons are bit-faithful.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
