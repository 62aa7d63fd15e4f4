use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A documented precondition on an operation's inputs was violated.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A scalar profile is undefined (or unbounded) on the relevant spectrum.
    #[error("domain error: {0}")]
    Domain(String),
    /// An eigenvalue sits within the gap tolerance of a spectral cut.
    #[error("spectral gap violated: eigenvalue {eigenvalue} within {tolerance} of level {level}")]
    Gap {
        eigenvalue: f64,
        level: f64,
        tolerance: f64,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An input that must be certified left-invertible was not.
    #[error("certificate error: {0}")]
    Certificate(String),
    #[error("loop is not certifiable at sample {index}: step exceeds modulus")]
    UncertifiableLoop { index: usize },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("budget must be positive")]
    Budget,
    #[error("invalid input: {0}")]
    Invalid(String),
}
