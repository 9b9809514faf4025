use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument fell outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A qubit index or register size is out of range.
    #[error("index out of range: {0}")]
    Index(String),

    /// The requested register exceeds the supported number of qubits.
    #[error("size limit exceeded: {qubits} qubits requested, limit is {limit}")]
    SizeLimit { qubits: usize, limit: usize },

    /// A measurement was asked for the post-selected branch of an outcome
    /// that has zero probability.
    #[error("impossible branch at {path}: success probability is zero")]
    ImpossibleBranch { path: String },

    /// A structural constraint on a protocol tree or its metadata failed.
    #[error("invalid protocol: {0}")]
    Validation(String),

    /// A protocol document could not be parsed.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    /// An internal invariant was violated.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
