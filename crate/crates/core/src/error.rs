use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the recognition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("no ink found: {0}")]
    EmptyImage(String),

    #[error("invalid locus: {0}")]
    InvalidLocus(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("format error in {}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Format {
        path: Option<PathBuf>,
        message: String,
    },

    #[error("segmentation error in {}: found {found} characters, expected 1", path.display())]
    Segmentation { path: PathBuf, found: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite (learning rate too large?)")]
    Divergence { epoch: usize },

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format {
            path: None,
            message: message.into(),
        }
    }

    /// Attaches a path to a format error that was raised without one.
    pub(crate) fn at_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Format {
                path: None,
                message,
            } => Error::Format {
                path: Some(path.into()),
                message,
            },
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
