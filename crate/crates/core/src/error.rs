use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building traces, solving steps or running experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty horizon: at least one time step is required")]
    EmptyHorizon,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: row {row}, column `{column}`: {reason}")]
    Ingest {
        path: String,
        row: usize,
        column: String,
        reason: String,
    },

    #[error("root finder failed on coordinate {coordinate}: {reason} (bracket [{lo}, {hi}], residual {residual:e}, {iterations} iterations)")]
    RootNotFound {
        coordinate: usize,
        reason: &'static str,
        lo: f64,
        hi: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
