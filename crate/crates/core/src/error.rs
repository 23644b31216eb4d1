use std::path::PathBuf;

use thiserror::Error;

use crate::Label;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no samples")]
    NoSamples,

    #[error("degenerate cloud: all points identical")]
    DegenerateCloud,

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("zero row at index {0}")]
    ZeroRow(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("requested {requested} components from {available}-dimensional data")]
    TooManyComponents { requested: usize, available: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ground-truth oracle requested but the data set has no label column")]
    MissingTruth,

    #[error("nothing to extend from")]
    NothingToExtend,

    #[error("empty cluster")]
    EmptyCluster,

    #[error("length mismatch: {0} predictions vs {1} truth labels")]
    LengthMismatch(usize, usize),

    #[error("oracle failed on point {id}: {reason}")]
    Oracle { id: usize, reason: String },

    #[error("label {label} on point {id} out of range")]
    BadLabel { id: usize, label: Label },

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
