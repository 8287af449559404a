use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("header mismatch: missing columns [{}], unexpected columns [{}]", missing.join(", "), extra.join(", "))]
    HeaderMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("parse error at data row {row}, column `{column}`: cannot read {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid value at data row {row}, column `{column}`: {reason}")]
    InvalidValue {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("standard deviation is undefined for a single record")]
    SingleRecord,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite gradient in {layer}")]
    NonFiniteGradient { layer: String },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown architecture {given:?}; valid ids are: {}", valid.join(", "))]
    UnknownArchitecture { given: String, valid: Vec<String> },

    #[error("{0} requires a trained autoencoder as encoder")]
    MissingEncoder(String),

    #[error("empty test set")]
    EmptyTestSet,

    #[error("empty grid: every axis needs at least one value")]
    EmptyGrid,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("repetition {index}: {source}")]
    Repetition {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
