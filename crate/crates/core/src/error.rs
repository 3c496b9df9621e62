use thiserror::Error;

use crate::network::NodeIx;

pub type Result<T, E = SkywayError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SkywayError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no edges could be formed (neighbor radius too small?)")]
    EmptyGraph,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("no edge between nodes {0} and {1}")]
    UnknownEdge(NodeIx, NodeIx),

    #[error("degenerate segment: endpoints coincide")]
    Degenerate,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("brute-force search limited to {limit} nodes, got {actual}")]
    TooLarge { limit: usize, actual: usize },

    #[error("plan mismatch: {0}")]
    Mismatch(String),

    #[error("no path from {from} to {to}")]
    Unreachable { from: NodeIx, to: NodeIx },

    #[error("no records to summarize")]
    EmptyInput,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
