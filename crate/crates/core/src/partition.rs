use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{BlockId, Graph, NodeId, NodeWeight};

/// Assignment of nodes to blocks.
///
/// Each block carries a final block count: the number of blocks it will be
/// split into by the time the partition reaches the target block count. The
/// final counts always sum to [`Partition::target_k`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<BlockId>,
    block_weights: Vec<NodeWeight>,
    final_counts: Vec<BlockId>,
    target_k: BlockId,
}

impl Partition {
    /// A finished `k`-way partition (every final count is 1).
    pub fn from_blocks(graph: &Graph, block_of: Vec<BlockId>, k: BlockId) -> Result<Self> {
        Self::with_final_counts(graph, block_of, vec![1; k as usize])
    }

    /// A partition with `final_counts.len()` blocks whose final counts sum to
    /// the target block count.
    pub fn with_final_counts(
        graph: &Graph,
        block_of: Vec<BlockId>,
        final_counts: Vec<BlockId>,
    ) -> Result<Self> {
        if block_of.len() != graph.n() {
            return Err(Error::InvalidParameter(format!(
                "partition labels {} nodes, graph has {}",
                block_of.len(),
                graph.n()
            )));
        }
        let k = final_counts.len();
        if let Some(b) = block_of.iter().find(|&&b| b as usize >= k) {
            return Err(Error::InvalidParameter(format!("block id {b} is not below k = {k}")));
        }
        if final_counts.contains(&0) {
            return Err(Error::InvalidParameter("final block counts must be positive".into()));
        }
        let block_weights = compute_block_weights(graph, &block_of, k);
        let target_k = final_counts.iter().sum();
        Ok(Self {
            block_of,
            block_weights,
            final_counts,
            target_k,
        })
    }

    /// All nodes in one block that is still to be split into `target_k` blocks.
    pub fn single_block(graph: &Graph, target_k: BlockId) -> Self {
        Self {
            block_of: vec![0; graph.n()],
            block_weights: vec![graph.total_node_weight()],
            final_counts: vec![target_k],
            target_k,
        }
    }

    pub(crate) fn from_raw(
        block_of: Vec<BlockId>,
        block_weights: Vec<NodeWeight>,
        final_counts: Vec<BlockId>,
    ) -> Self {
        debug_assert_eq!(block_weights.len(), final_counts.len());
        let target_k = final_counts.iter().sum();
        Self {
            block_of,
            block_weights,
            final_counts,
            target_k,
        }
    }

    /// Current number of blocks.
    #[inline]
    pub fn k(&self) -> usize {
        self.block_weights.len()
    }

    pub fn target_k(&self) -> BlockId {
        self.target_k
    }

    #[inline]
    pub fn block_of(&self, v: NodeId) -> BlockId {
        self.block_of[v as usize]
    }

    pub fn blocks(&self) -> &[BlockId] {
        &self.block_of
    }

    pub fn into_blocks(self) -> Vec<BlockId> {
        self.block_of
    }

    #[inline]
    pub fn block_weight(&self, b: BlockId) -> NodeWeight {
        self.block_weights[b as usize]
    }

    pub fn block_weights(&self) -> &[NodeWeight] {
        &self.block_weights
    }

    pub fn max_block_weight(&self) -> NodeWeight {
        self.block_weights.iter().copied().max().unwrap_or(0)
    }

    pub fn final_count(&self, b: BlockId) -> BlockId {
        self.final_counts[b as usize]
    }

    pub fn final_counts(&self) -> &[BlockId] {
        &self.final_counts
    }

    /// Number of blocks without nodes.
    pub fn empty_blocks(&self) -> usize {
        let mut used = vec![false; self.k()];
        for &b in &self.block_of {
            used[b as usize] = true;
        }
        used.iter().filter(|&&u| !u).count()
    }

    /// Moves `v` to block `to`.
    pub fn move_node(&mut self, graph: &Graph, v: NodeId, to: BlockId) {
        let from = self.block_of[v as usize];
        let w = graph.node_weight(v);
        self.block_weights[from as usize] -= w;
        self.block_weights[to as usize] += w;
        self.block_of[v as usize] = to;
    }

    /// Carries the partition of a coarse graph over to the finer graph whose
    /// nodes map onto it via `coarse_of`. Block weights and final counts are
    /// unchanged.
    pub fn project(&self, coarse_of: &[NodeId]) -> Partition {
        let block_of = coarse_of
            .par_iter()
            .map(|&c| self.block_of[c as usize])
            .collect();
        Partition {
            block_of,
            block_weights: self.block_weights.clone(),
            final_counts: self.final_counts.clone(),
            target_k: self.target_k,
        }
    }

    /// Recomputes block weights from scratch and compares.
    pub fn weights_consistent(&self, graph: &Graph) -> bool {
        compute_block_weights(graph, &self.block_of, self.k()) == self.block_weights
    }
}

pub(crate) fn compute_block_weights(graph: &Graph, block_of: &[BlockId], k: usize) -> Vec<NodeWeight> {
    let mut weights = vec![0; k];
    for (v, &b) in block_of.iter().enumerate() {
        weights[b as usize] += graph.node_weight(v as NodeId);
    }
    weights
}
