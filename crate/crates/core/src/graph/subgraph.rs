use rayon::prelude::*;

use super::{BlockId, Graph, NodeId};
use crate::partition::Partition;

/// Induced subgraph of one block together with its local-to-original node map.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub block: BlockId,
    pub graph: Graph,
    /// `nodes[local] = original id`, ascending.
    pub nodes: Vec<NodeId>,
}

/// Induced subgraph of every block, in block order.
pub fn extract_subgraphs(graph: &Graph, partition: &Partition) -> Vec<Subgraph> {
    let all: Vec<BlockId> = (0..partition.k() as BlockId).collect();
    extract_blocks(graph, partition, &all)
}

/// Induced subgraphs of the requested blocks, in the given order. Node
/// weights are preserved and only intra-block edges are kept.
pub fn extract_blocks(graph: &Graph, partition: &Partition, blocks: &[BlockId]) -> Vec<Subgraph> {
    let k = partition.k();
    let mut block_offsets = vec![0usize; k + 1];
    for v in graph.nodes() {
        block_offsets[partition.block_of(v) as usize + 1] += 1;
    }
    for b in 0..k {
        block_offsets[b + 1] += block_offsets[b];
    }
    let mut by_block = vec![0 as NodeId; graph.n()];
    let mut local_id = vec![0 as NodeId; graph.n()];
    let mut fill = block_offsets.clone();
    for v in graph.nodes() {
        let b = partition.block_of(v) as usize;
        local_id[v as usize] = (fill[b] - block_offsets[b]) as NodeId;
        by_block[fill[b]] = v;
        fill[b] += 1;
    }

    blocks
        .par_iter()
        .map(|&block| {
            let nodes = by_block[block_offsets[block as usize]..block_offsets[block as usize + 1]].to_vec();
            let mut offsets = Vec::with_capacity(nodes.len() + 1);
            offsets.push(0usize);
            let mut targets = Vec::new();
            let mut edge_weights = Vec::new();
            let mut node_weights = Vec::with_capacity(nodes.len());
            for &v in &nodes {
                for (u, w) in graph.neighbors(v) {
                    if partition.block_of(u) == block {
                        targets.push(local_id[u as usize]);
                        edge_weights.push(w);
                    }
                }
                offsets.push(targets.len());
                node_weights.push(graph.node_weight(v));
            }
            Subgraph {
                block,
                graph: Graph::from_csr(offsets, targets, edge_weights, node_weights),
                nodes,
            }
        })
        .collect()
}
