use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension mismatch for player {player}: expected {expected}, got {actual}")]
    DimensionMismatch {
        player: usize,
        expected: usize,
        actual: usize,
    },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("diagnostic unavailable: {0}")]
    DiagnosticUnavailable(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
