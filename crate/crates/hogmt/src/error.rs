//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraint.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Array shapes or index ranges do not line up.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// An eigen-selection threshold removed every mode.
    #[error("eigen selection is empty: {0}")]
    EmptySelection(String),

    /// The SVD or eigendecomposition backend did not converge.
    #[error("decomposition failed to converge")]
    DecompositionFailed,

    /// A binary container file is malformed or has the wrong magic.
    #[error("malformed container: {0}")]
    BadContainer(String),

    /// Numerical guard tripped (zero power, zero sigma, non-finite input).
    #[error("numerical guard: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
