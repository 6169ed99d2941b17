use thiserror::Error;

use crate::graph::StreamViolation;

/// Errors produced by the `kmatch` crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor or operation was given a parameter outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The stream breaks the graph-stream model (phantom delete, duplicate insert, ...).
    #[error("malformed stream: {0}")]
    MalformedStream(StreamViolation),

    /// A text artifact (stream file, serialized scheme) could not be parsed.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// The brute-force oracle refuses instances it cannot enumerate.
    #[error("instance has {edges} edges; brute-force enumeration is limited to {limit}")]
    InfeasibleSize { edges: usize, limit: usize },

    /// Two linear sketches built from different randomness were combined.
    #[error("sketches were built from different random parameters and cannot be merged")]
    IncompatibleSketch,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }
}
