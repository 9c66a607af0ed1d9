use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the feature extraction and classification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input too small: {0}")]
    InputSize(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("mesh topology: {0}")]
    Topology(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("value outside the measure's domain: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("cannot stratify: {0}")]
    Stratification(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("wrong model kind: {0}")]
    Kind(String),
    #[error("unknown label: {0}")]
    Label(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("manifest {}: {msg}", path.display())]
    Ingest { path: PathBuf, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("wav decode: {0}")]
    Wav(#[from] hound::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
