use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator, the learners and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("architecture mismatch: {0:?} vs {1:?}")]
    ArchitectureMismatch(Vec<usize>, Vec<usize>),

    #[error("replay buffer holds {stored} entries, batch needs {requested}")]
    InsufficientSamples { stored: usize, requested: usize },

    #[error("numeric divergence: {0}")]
    Divergence(String),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("exhaustive joint action limited to groups of at most 3 members, got {0}")]
    GroupTooLarge(usize),

    #[error("figure {figure} is missing inputs: {missing:?}")]
    MissingInputs { figure: u8, missing: Vec<String> },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
