use thiserror::Error;

/// Errors produced by the numerical engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid probability {0}: must lie in [0, 1]")]
    InvalidProbability(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("subset must be nonempty")]
    EmptySubset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exact engine supports n <= {limit}, got n = {n}")]
    EngineTooLarge { n: usize, limit: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("column sums exceed 1 at columns {0:?}")]
    ColumnSumViolation(Vec<usize>),

    #[error("row sums exceed 1 at rows {0:?}")]
    RowSumViolation(Vec<usize>),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error("unknown bound family `{0}`")]
    UnknownFamily(String),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("enumeration of {count} subsets exceeds the limit {limit}; use sampling")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
