use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus, pipeline, training and persistence operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Operating-system I/O failure, tagged with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed content in a corpus file, with the offending data row.
    #[error("{path}: row {row}: {message}")]
    CorpusRow {
        path: PathBuf,
        row: usize,
        message: String,
    },
    /// Malformed model, vocabulary, history or config file.
    #[error("{path}: {message}")]
    FileFormat { path: PathBuf, message: String },
    /// Invalid argument, label or configuration value.
    #[error("{0}")]
    InvalidInput(String),
    /// Tensor or parameter shape disagreement.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// A finite number was required but a NaN or infinity appeared.
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn corpus_row(path: impl Into<PathBuf>, row: usize, message: impl Into<String>) -> Self {
        Error::CorpusRow {
            path: path.into(),
            row,
            message: message.into(),
        }
    }

    pub fn file_format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::FileFormat {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub fn shape(message: impl Into<String>) -> Self {
        Error::ShapeMismatch(message.into())
    }

    /// True for operating-system I/O failures, false for validation problems.
    /// The CLI maps the former to exit code 2 and everything else to 1.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
