//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by model construction, evaluation and estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates a model invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A pattern derivative was requested inside the sector-edge guard band.
    #[error("pattern derivative is singular {distance:.3e} rad from a sector edge")]
    BoundarySingularity { distance: f64 },

    /// The exact local-angle map was asked for a target at a sector center.
    #[error("target coincides with the center of sector {sector}")]
    DegeneratePosition { sector: usize },

    /// A vector or matrix has the wrong length.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The likelihood metric vanished on the whole search grid.
    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    /// The asymptotic bound needs identical transmit and receive arrays.
    #[error("asymmetric architecture: M_I = {m_i}, M_S = {m_s}")]
    AsymmetricArchitecture { m_i: usize, m_s: usize },
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
