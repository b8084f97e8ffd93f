//! Simulation and verification lab for the unitary matrix process
//! `A_t = R U_t S U_t*`, where `U_t` is a Brownian motion on the unitary
//! group and `R`, `S` are self-adjoint symmetries.
//!
//! The crate has three layers:
//!
//! * exact linear algebra on tensor powers and the symmetric-group action
//!   ([`tensor`]), plus closed-form heat-kernel evaluators ([`heat`]);
//! * path simulation of the unitary Brownian motion ([`sim`]) and the
//!   derived processes ([`process`]);
//! * Monte Carlo estimators with standard errors ([`estimate`]) and the
//!   two-sided identity verifiers ([`verify`]).

pub mod estimate;
pub mod heat;
pub mod matrix;
pub mod perm;
pub mod process;
pub mod rng;
pub mod sim;
pub mod tensor;
pub mod verify;

pub use matrix::ComplexMatrix;
pub use perm::Permutation;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tensor dimension {rows} rows exceeds the configured budget of {cap} rows")]
    BudgetExceeded { rows: usize, cap: usize },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("time {t} is not aligned with the simulation grid (h = {h})")]
    OffGrid { t: f64, h: f64 },
    #[error("integration step failed: {0}")]
    StepFailure(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
