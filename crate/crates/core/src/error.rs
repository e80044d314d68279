use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A quadrature, inversion or eigen-solve failed to meet its tolerance.
    #[error("{op}: numerical error: {msg}")]
    Numerical { op: &'static str, msg: String },

    /// A hypothesis required by a bound or construction does not hold.
    #[error("{op}: precondition violated: {msg}")]
    Precondition { op: &'static str, msg: String },

    #[error("{op}: index {index} out of range (len {len})")]
    Index { op: &'static str, index: usize, len: usize },

    #[error("{op}: shape mismatch: expected {expected}, got {got}")]
    Shape { op: &'static str, expected: usize, got: usize },

    /// A subordinator path stopped before crossing the requested level.
    #[error("inverse subordinator: path horizon {horizon} never exceeds level {level}")]
    InsufficientHorizon { level: f64, horizon: f64 },

    /// A Monte Carlo path failed; carries the path index.
    #[error("path {path}: {source}")]
    Path {
        path: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn numerical(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerical { op, msg: msg.into() }
    }

    pub(crate) fn precondition(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Precondition { op, msg: msg.into() }
    }
}
