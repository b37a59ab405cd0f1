use autostego::{LmError, StegoError};
use thiserror::Error;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;
pub const EXIT_DESYNC: u8 = 4;
pub const EXIT_LM: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Stego(#[from] StegoError),
}

impl From<LmError> for CliError {
    fn from(e: LmError) -> Self {
        CliError::Stego(StegoError::Lm(e))
    }
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Input(_) => EXIT_OTHER,
            CliError::Stego(e) => match e {
                StegoError::InsufficientCapacity { .. } | StegoError::MessageTooLong { .. } => EXIT_CAPACITY,
                StegoError::Desync { .. } | StegoError::TruncatedStream { .. } => EXIT_DESYNC,
                StegoError::Lm(LmError::Vocab(_)) => EXIT_CONFIG,
                StegoError::Lm(_) => EXIT_LM,
                StegoError::Config(_) | StegoError::KeyTooShort { .. } => EXIT_CONFIG,
                _ => EXIT_OTHER,
            },
        }
    }
}
