use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum TabError {
    /// A parameter violates a construction-time bound.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exact computation would exceed its enumeration guard.
    #[error("feasibility error: {0}")]
    Feasibility(String),

    /// An entropy source ran out of bytes before the request was met.
    #[error("entropy exhausted: needed {needed} bytes, source held {available}")]
    EntropyExhausted { needed: u64, available: u64 },

    /// A fixed-capacity structure cannot accept more elements.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Caller-supplied data is malformed (duplicates, wrong shape, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A statistical test was asked to run with cells too sparse to be valid.
    #[error("binning error: {0}")]
    Binning(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TabError>;
