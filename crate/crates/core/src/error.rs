use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}line {line}: {message}", path_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("invalid minutia: {0}")]
    InvalidMinutia(String),

    #[error("degenerate pair: minutiae have identical coordinates")]
    DegeneratePair,

    #[error("insufficient minutiae: no admissible pairs (Z = {count})")]
    InsufficientMinutiae { count: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported transform: {0}")]
    UnsupportedTransform(String),

    #[error("degenerate score: {0}")]
    DegenerateScore(String),

    #[error("incompatible templates: {0}")]
    IncompatibleTemplates(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn with_path(self, path: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
