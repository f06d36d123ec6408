use std::io;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum SaflError {
    #[error("invalid dataset spec `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite parameters after local step {step} (epoch {epoch})")]
    NonFinite { epoch: usize, step: usize },

    #[error("dataset `{name}`: {source}")]
    Dataset {
        name: String,
        #[source]
        source: Box<SaflError>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SaflError {
    /// True for errors caused by bad user input rather than a failing run.
    pub fn is_config_error(&self) -> bool {
        match self {
            SaflError::Config(_) | SaflError::InvalidSpec { .. } | SaflError::Json(_) => true,
            SaflError::Dataset { source, .. } => source.is_config_error(),
            _ => false,
        }
    }

    pub(crate) fn in_dataset(self, name: &str) -> SaflError {
        SaflError::Dataset {
            name: name.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = SaflError> = std::result::Result<T, E>;
