use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid value for `{key}` = {value}: expected {allowed}")]
    Validation {
        key: String,
        value: String,
        allowed: String,
    },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("undefined epoch: {0}")]
    UndefinedEpoch(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),

    #[error("invalid incremental step index {0} (must be >= 1)")]
    InvalidStep(usize),

    #[error("corrupted model: {0}")]
    CorruptedModel(String),

    #[error("training diverged at epoch {epoch}: loss = {loss} (last finite loss {last_finite})")]
    TrainingDiverged {
        epoch: usize,
        loss: f64,
        last_finite: f64,
    },

    #[error("brute-force oracle supports at most {max} items, got {got}")]
    OracleSize { max: usize, got: usize },

    #[error("no data: {0}")]
    NoData(&'static str),

    #[error("undefined baseline: reference average cost is zero")]
    UndefinedBaseline,

    #[error("no results found in {0}")]
    NoResults(PathBuf),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error comes from user-supplied configuration rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::Validation { .. }
                | Error::UnknownKey(_)
                | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
