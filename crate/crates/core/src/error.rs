use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input contains NaN or infinite entries")]
    NonFiniteInput,

    #[error("covariance matrix is singular (smallest eigenvalue {min:e}, largest {max:e})")]
    SingularCovariance { min: f64, max: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no pair of observations satisfies the threshold")]
    EmptySelection,

    #[error("observations {i} and {j} have identical predictors; the line through them is undefined")]
    DegeneratePair { i: usize, j: usize },

    #[error("need at least {needed} slices, got {got}")]
    TooFewSlices { needed: usize, got: usize },

    #[error("only {accepted} simulated pairs satisfied the conditioning event (need 1000)")]
    DegenerateConditioning { accepted: usize },

    #[error("estimated direction is identically zero")]
    ZeroDirection,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("non-numeric cell at line {line}, column '{column}': {value:?}")]
    NonNumericCell {
        line: usize,
        column: String,
        value: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by the data itself, as opposed to how the tool was invoked.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_) | Error::Config(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
