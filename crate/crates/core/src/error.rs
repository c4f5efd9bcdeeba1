use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("io error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("record {index}: rating {value} outside [1, 5]")]
    RatingOutOfRange { index: usize, value: f64 },

    #[error("record {index}: polarity {value} is not finite")]
    NonFinitePolarity { index: usize, value: f64 },

    #[error("record {index}: empty aspect key")]
    EmptyAspect { index: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unknown {kind} `{key}`")]
    UnknownNode { kind: &'static str, key: String },

    #[error("no embedding for relation {0}")]
    UnknownRelation(String),

    #[error("no {0} nodes available to sample from")]
    EmptySamplingPool(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch}, edge {edge}: {detail}")]
    NonFinite {
        epoch: usize,
        edge: usize,
        detail: String,
    },

    #[error("malformed graph file at line {line}: {message}")]
    GraphFormat { line: usize, message: String },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
