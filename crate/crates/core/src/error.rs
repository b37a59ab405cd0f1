use thiserror::Error;

use crate::lm::LmError;

#[derive(Debug, Error)]
pub enum StegoError {
    #[error("index {index} out of range for sequence of length {len}")]
    OutOfBounds { index: usize, len: usize },

    #[error("step {step} out of range for plan with {steps} masked positions")]
    StepOutOfRange { step: usize, steps: usize },

    #[error("message of {bits} bits does not fit the 32-bit length header")]
    MessageTooLong { bits: usize },

    #[error("insufficient capacity: embedded {consumed} of {required} framed bits")]
    InsufficientCapacity { consumed: usize, required: usize },

    #[error("truncated stream: need {needed} bits, have {available}")]
    TruncatedStream { needed: usize, available: usize },

    #[error("desync at position {position}: token {token:?} is not in the reconstructed codebook")]
    Desync { position: usize, token: String },

    #[error("candidate set of size {0} cannot be coded (need at least 2)")]
    DegenerateCandidates(usize),

    #[error("no countable words in text")]
    UndefinedPayload,

    #[error("text has no maskable tokens")]
    NoMaskableTokens,

    #[error("secret key must be at least {min} bytes, got {got}")]
    KeyTooShort { min: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty token sequence")]
    EmptySequence,

    #[error("invalid payload encoding: {0}")]
    Encoding(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Lm(#[from] LmError),
}

pub type Result<T, E = StegoError> = std::result::Result<T, E>;
