use alloc::string::String;

use crate::wire::{ClusterId, Tag};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("{what} exceeds the limit ({requested} > {limit})")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("kernel evaluated at coincident points")]
    Singular,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("node {node}: expected {expected:?} from node {peer}, got {actual:?}")]
    Desync {
        node: usize,
        peer: usize,
        expected: Tag,
        actual: Tag,
    },
    #[error("node {peer} is unreachable")]
    Disconnected { peer: usize },
    #[error("timed out waiting for node {peer}")]
    Timeout { peer: usize },
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("round {round}: {detail}")]
    Round { round: usize, detail: String },
    #[error("parameter mismatch between nodes: {0}")]
    ParameterMismatch(String),
    #[error("missing geometry for block ({row}, {col})")]
    MissingGeometry { row: ClusterId, col: ClusterId },
}
