use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("not a RIFF/WAVE container: {0}")]
    NotWav(String),
    #[error("unsupported WAV codec: {0}")]
    UnsupportedCodec(String),

    #[error("buffer of {samples} samples is shorter than one frame of {frame_len} samples")]
    BufferTooShort { samples: usize, frame_len: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unknown processor {0}")]
    UnknownProcessor(usize),
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` for errors caused by bad input data rather than bad usage.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidConfig(_))
    }
}
