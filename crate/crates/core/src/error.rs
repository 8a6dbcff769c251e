use thiserror::Error;

use crate::graph::{BlockId, NodeId};

/// Errors raised by graph construction and the partitioning pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}) references a node outside 0..{n}")]
    NodeOutOfRange { u: u64, v: u64, n: usize },

    #[error("node {node} has weight 0; node weights must be positive")]
    ZeroNodeWeight { node: NodeId },

    #[error("edge ({u}, {v}) has weight 0; edge weights must be positive")]
    ZeroEdgeWeight { u: NodeId, v: NodeId },

    #[error("expected {expected} node weights, got {got}")]
    NodeWeightCount { expected: usize, got: usize },

    #[error("graph has {n} nodes, at most {max} are supported")]
    TooManyNodes { n: usize, max: usize },

    #[error("the number of blocks must be at least 2, got {0}")]
    InvalidBlockCount(BlockId),

    #[error("cannot partition {n} nodes into {k} blocks")]
    MoreBlocksThanNodes { n: usize, k: BlockId },

    #[error("imbalance parameter must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("coarsening a level requires more than {limit} nodes, graph has {n}")]
    NotCoarsenable { n: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
