use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch at {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("tape does not match the network it is replayed on: {0}")]
    StaleTape(String),
    #[error("non-finite value in row {row}, column {column}")]
    NonFiniteData { row: usize, column: usize },
    #[error("dataset too small: {0} rows (need at least 10)")]
    TooFewRows(usize),
    #[error("empty input")]
    Empty,
    #[error("non-finite gradient at epoch {epoch} for parameter {param}")]
    NonFiniteGradient { epoch: usize, param: String },
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("{0} outside the validated domain")]
    Domain(String),
    #[error("reflection coefficient is exactly zero; return loss is unbounded")]
    SingularReturnLoss,
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }
}
