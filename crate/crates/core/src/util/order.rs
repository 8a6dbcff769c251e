use std::ops::Range;

use rand::seq::SliceRandom;

use super::random::{mix_seed, rng_from_seed};
use crate::graph::{Graph, NodeId};

/// Default number of nodes per traversal chunk.
pub const DEFAULT_CHUNK_SIZE: usize = 1024;

/// A traversal chunk: a contiguous node range plus the seed that drives the
/// shuffle of its nodes.
#[derive(Debug, Clone)]
pub struct Chunk {
    pub nodes: Range<usize>,
    pub seed: u64,
}

impl Chunk {
    /// Node ids of the chunk in shuffled order.
    pub fn shuffled_nodes(&self) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = (self.nodes.start as NodeId..self.nodes.end as NodeId).collect();
        nodes.shuffle(&mut rng_from_seed(self.seed));
        nodes
    }
}

/// Degree buckets split into fixed-size chunks. Buckets are visited in
/// increasing degree order; chunk order inside a bucket and node order inside a
/// chunk are randomized per round.
#[derive(Debug, Clone)]
pub struct ChunkedOrder {
    buckets: Vec<Vec<Range<usize>>>,
}

impl ChunkedOrder {
    pub fn new(graph: &Graph, chunk_size: usize) -> Self {
        let chunk_size = chunk_size.max(1);
        let buckets = graph
            .bucket_ranges()
            .into_iter()
            .map(|bucket| {
                let mut chunks = Vec::new();
                let mut start = bucket.start;
                while start < bucket.end {
                    let end = (start + chunk_size).min(bucket.end);
                    chunks.push(start..end);
                    start = end;
                }
                chunks
            })
            .collect();
        Self { buckets }
    }

    /// Chunks for one round, grouped by bucket, with shuffled chunk order.
    pub fn round(&self, round_seed: u64) -> Vec<Vec<Chunk>> {
        let mut rng = rng_from_seed(round_seed);
        let mut salt = 0u64;
        self.buckets
            .iter()
            .map(|chunks| {
                let mut round: Vec<Chunk> = chunks
                    .iter()
                    .map(|range| {
                        salt += 1;
                        Chunk {
                            nodes: range.clone(),
                            seed: mix_seed(round_seed, salt),
                        }
                    })
                    .collect();
                round.shuffle(&mut rng);
                round
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::rearrange_by_degree_buckets;

    #[test]
    fn chunks_cover_every_node_once() {
        let (g, _) = rearrange_by_degree_buckets(&star(40));
        let order = ChunkedOrder::new(&g, 8);
        let mut seen = vec![0; g.n()];
        for bucket in order.round(3) {
            for chunk in bucket {
                for v in chunk.shuffled_nodes() {
                    seen[v as usize] += 1;
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn rounds_are_reproducible() {
        let g = grid(10, 10);
        let order = ChunkedOrder::new(&g, 7);
        let a: Vec<Vec<NodeId>> = order.round(5)[0].iter().map(Chunk::shuffled_nodes).collect();
        let b: Vec<Vec<NodeId>> = order.round(5)[0].iter().map(Chunk::shuffled_nodes).collect();
        assert_eq!(a, b);
    }
}
