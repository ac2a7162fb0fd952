use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),

    #[error("vertex {0} is not part of this graph")]
    UnknownVertex(VertexId),

    #[error("vertex id collision between distinct coordinates ({0})")]
    IdCollision(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("degree bound violated: vertex {vertex} has degree {degree} > {bound}")]
    DegreeBoundViolated { vertex: VertexId, degree: u64, bound: u64 },

    #[error("edge class not present in the cocycle table: {0}")]
    UnknownClass(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    #[error("inequality violated beyond slack: {0}")]
    InequalityViolation(String),

    #[error("acceptance-rejection gave up after {0} proposals")]
    RejectionExhausted(u64),

    #[error("malformed edge list at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn horizon(msg: impl Into<String>) -> Self {
        Error::HorizonExceeded(msg.into())
    }

    pub fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
