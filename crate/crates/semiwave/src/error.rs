//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Initial data rejected (unsupported family parameters, R < 1, ...).
    #[error("invalid initial data: {0}")]
    InvalidData(String),

    /// Nonlinearity or run parameters outside the admissible range.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Requested grid cannot be built (does not cover the cone, or is
    /// too large to allocate).
    #[error("bad grid: {0}")]
    Grid(String),

    /// A field handed to an operator contained NaN or infinity.
    #[error("non-finite value in input field at node (i={i}, n={n})")]
    NonFiniteInput { i: usize, n: usize },

    /// The amplitude trace carries no usable blow-up signal.
    #[error("blow-up time estimation failed: {0}")]
    EstimationFailed(String),

    /// The characteristic amplitude vanishes identically; the traveling-wave
    /// solution exists for all time and no finite blow-up time is defined.
    #[error("zero characteristic amplitude: the solution does not blow up")]
    InfiniteLifespan,

    /// Not enough records to fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
