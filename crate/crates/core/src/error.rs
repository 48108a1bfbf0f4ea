use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid WAV file {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short: {0}")]
    TooShort(String),
    #[error("no voiced frames in F0 track")]
    AllUnvoiced,
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("annotation {path}, line {line}: {message}")]
    Annotation {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("config {origin}, line {line}: {message}")]
    Config {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("report {path}: {message}")]
    Report { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
