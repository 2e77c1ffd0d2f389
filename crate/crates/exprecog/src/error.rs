//! Error taxonomy shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A vector or matrix argument does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Generic precondition violation on an argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix or sample value is NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    /// A sampled-data oracle was queried outside the lattice it was built on.
    #[error("oracle evaluation failed at point {point:?}: {reason}")]
    OracleDomain { point: Vec<f64>, reason: String },

    /// The recurrence system has lower rank than the requested order; the
    /// function spans fewer translates than asked for.
    #[error("degenerate order: system rank {detected} is below requested order {requested}")]
    DegenerateOrder { requested: usize, detected: usize },

    /// A characteristic root is (numerically) zero, so no exponent exists.
    #[error("degenerate root: characteristic root at {magnitude:.3e} has no finite logarithm")]
    DegenerateRoot { magnitude: f64 },

    /// The hypothesis of the test being run is violated by the supplied data.
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    /// Expression text failed to lex or parse; `offset` is a byte position.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A sample file is malformed.
    #[error("malformed input{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    MalformedInput { line: Option<usize>, message: String },

    /// I/O failure wrapped with the path involved.
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }
}
