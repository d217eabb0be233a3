use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical argument is outside its domain (non-positive mass, negative
    /// rate, zero dark frequency where a finite one is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A Gaussian state violates the Heisenberg bound beyond the clamping
    /// tolerance.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Configuration file or schedule is malformed. `key` names the offending
    /// field so callers can produce field-precise messages.
    #[error("configuration error: {key}: {message}")]
    Config { key: String, message: String },

    /// Numerical integration failed (step underflow, non-finite values).
    #[error("integration error: {0}")]
    Integration(String),

    /// Mathieu calibration could not find a q inside the stability region.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Lock-in reconstruction failed (trace too short, degenerate basis).
    #[error("reconstruction error: {0}")]
    Reconstruction(String),

    /// Ensemble run produced too many invalid shots.
    #[error("ensemble error: {0}")]
    Ensemble(String),

    /// Least-squares fit did not converge.
    #[error("fit error: {0}")]
    Fit(String),

    /// Fit Jacobian is singular; `direction` describes the unidentifiable
    /// parameter combination.
    #[error("degeneracy error: unidentifiable direction {direction}")]
    Degenerate { direction: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
