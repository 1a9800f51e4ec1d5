use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PacError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("class too large to enumerate: {cardinality} members exceeds cap {cap}")]
    ClassTooLarge { cardinality: String, cap: u64 },

    #[error("domain of {size} points is too large for exhaustive shattering search (max {max}); use declared_vc")]
    DomainTooLarge { size: usize, max: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("empty conditioning region")]
    EmptyRegion,

    #[error("parameters out of range: {0}")]
    ParametersOutOfRange(String),

    #[error("missing trace data: {0}")]
    MissingTraceData(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unknown fixture `{name}`; available: {available}")]
    UnknownFixture { name: String, available: String },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PacError {
    fn from(err: std::io::Error) -> Self {
        PacError::Io(err.to_string())
    }
}

impl From<csv::Error> for PacError {
    fn from(err: csv::Error) -> Self {
        PacError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PacError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PacError {
    PacError::Validation(msg.into())
}
