use std::path::Path;

use plrnet_core::Error as CoreError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{failed} of {total} sweep runs failed")]
    PartialSweep { failed: usize, total: usize },
}

impl CliError {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NUMERICAL: u8 = 4;
    pub const PARTIAL: u8 = 5;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => Self::IO,
            CliError::Usage(_) | CliError::Config(_) => Self::CONFIG,
            CliError::Data(_) => Self::DATA,
            CliError::Numerical(_) => Self::NUMERICAL,
            CliError::PartialSweep { .. } => Self::PARTIAL,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Config(_) => CliError::Config(msg),
            CoreError::Dimension { .. }
            | CoreError::NonFiniteData { .. }
            | CoreError::TooFewRows(_)
            | CoreError::Empty
            | CoreError::Domain(_) => CliError::Data(msg),
            CoreError::NonFiniteGradient { .. }
            | CoreError::NonFiniteLoss { .. }
            | CoreError::SingularReturnLoss
            | CoreError::StaleTape(_) => CliError::Numerical(msg),
        }
    }
}
