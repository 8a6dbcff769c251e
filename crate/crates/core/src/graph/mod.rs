//! Immutable weighted graphs in compressed adjacency form, plus the
//! structural operations the partitioner needs: construction, degree-bucket
//! rearrangement, cluster contraction and induced-subgraph extraction.

mod buckets;
mod builder;
mod contract;
mod subgraph;

pub use buckets::{degree_bucket, rearrange_by_degree_buckets};
pub use builder::{build_graph, GraphBuilder};
pub use contract::{contract, contract_sequential, Clustering, HierarchyLevel, NO_CLUSTER};
pub use subgraph::{extract_blocks, extract_subgraphs, Subgraph};

use std::ops::Range;

pub type NodeId = u32;
pub type BlockId = u32;
pub type NodeWeight = u64;
pub type EdgeWeight = u64;

/// Largest node count representable with 32-bit node ids (one id is reserved
/// as a sentinel by several algorithms).
pub const MAX_NODES: usize = (u32::MAX - 1) as usize;

/// Undirected graph with positive integer node and edge weights.
///
/// Every undirected edge is stored twice, once in each endpoint's adjacency
/// range. [`Graph::m`] reports undirected edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    edge_weights: Vec<EdgeWeight>,
    node_weights: Vec<NodeWeight>,
    total_node_weight: NodeWeight,
    max_node_weight: NodeWeight,
    bucket_offsets: Option<Vec<usize>>,
}

impl Graph {
    /// Assembles a graph from raw CSR arrays. The caller guarantees symmetry,
    /// absence of self-loops and positive weights.
    pub(crate) fn from_csr(
        offsets: Vec<usize>,
        targets: Vec<NodeId>,
        edge_weights: Vec<EdgeWeight>,
        node_weights: Vec<NodeWeight>,
    ) -> Self {
        debug_assert_eq!(offsets.len(), node_weights.len() + 1);
        debug_assert_eq!(targets.len(), edge_weights.len());
        debug_assert_eq!(*offsets.last().unwrap(), targets.len());
        let total_node_weight = node_weights.iter().sum();
        let max_node_weight = node_weights.iter().copied().max().unwrap_or(0);
        Self {
            offsets,
            targets,
            edge_weights,
            node_weights,
            total_node_weight,
            max_node_weight,
            bucket_offsets: None,
        }
    }

    pub(crate) fn with_bucket_offsets(mut self, bucket_offsets: Vec<usize>) -> Self {
        debug_assert_eq!(bucket_offsets.last().copied(), Some(self.n()));
        self.bucket_offsets = Some(bucket_offsets);
        self
    }

    /// Number of nodes.
    #[inline]
    pub fn n(&self) -> usize {
        self.node_weights.len()
    }

    /// Number of undirected edges.
    #[inline]
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn node_weight(&self, v: NodeId) -> NodeWeight {
        self.node_weights[v as usize]
    }

    pub fn node_weights(&self) -> &[NodeWeight] {
        &self.node_weights
    }

    pub fn total_node_weight(&self) -> NodeWeight {
        self.total_node_weight
    }

    pub fn max_node_weight(&self) -> NodeWeight {
        self.max_node_weight
    }

    /// Sum of all undirected edge weights.
    pub fn total_edge_weight(&self) -> EdgeWeight {
        self.edge_weights.iter().sum::<EdgeWeight>() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> impl ExactSizeIterator<Item = (NodeId, EdgeWeight)> + '_ {
        let range = self.edge_range(v);
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_weights[range].iter().copied())
    }

    #[inline]
    pub fn adjacent_nodes(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.edge_range(v)]
    }

    #[inline]
    pub(crate) fn edge_range(&self, v: NodeId) -> Range<usize> {
        let v = v as usize;
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn nodes(&self) -> Range<NodeId> {
        0..self.n() as NodeId
    }

    /// Iterates each undirected edge once as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, EdgeWeight)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Start offsets of the exponential degree buckets, present once the graph
    /// was produced by [`rearrange_by_degree_buckets`]. Entry `i` is the first
    /// node of bucket `i`; the final entry equals `n`.
    pub fn bucket_offsets(&self) -> Option<&[usize]> {
        self.bucket_offsets.as_deref()
    }

    /// Node ranges of the non-empty degree buckets in increasing degree order.
    /// Graphs without bucket information form a single bucket.
    pub fn bucket_ranges(&self) -> Vec<Range<usize>> {
        match &self.bucket_offsets {
            Some(offsets) => offsets
                .windows(2)
                .filter(|w| w[0] < w[1])
                .map(|w| w[0]..w[1])
                .collect(),
            None if self.n() == 0 => Vec::new(),
            None => vec![0..self.n()],
        }
    }

    pub(crate) fn raw_targets(&self) -> &[NodeId] {
        &self.targets
    }
}
