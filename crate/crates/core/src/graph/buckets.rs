use super::{Graph, NodeId};

/// Exponential degree bucket of a node: bucket `i` holds degrees in
/// `[2^i, 2^(i+1))`, and bucket 0 additionally holds isolated nodes.
#[inline]
pub fn degree_bucket(degree: usize) -> usize {
    if degree <= 1 {
        0
    } else {
        (usize::BITS - 1 - degree.leading_zeros()) as usize
    }
}

/// Relabels nodes so that each degree bucket occupies a contiguous id range,
/// buckets in increasing order. Relative node order inside a bucket is kept.
///
/// Returns the rearranged graph and the permutation mapping old ids to new ids.
pub fn rearrange_by_degree_buckets(graph: &Graph) -> (Graph, Vec<NodeId>) {
    let n = graph.n();
    let buckets: Vec<usize> = graph.nodes().map(|v| degree_bucket(graph.degree(v))).collect();
    let num_buckets = buckets.iter().copied().max().map_or(1, |b| b + 1);

    let mut bucket_offsets = vec![0usize; num_buckets + 1];
    for &b in &buckets {
        bucket_offsets[b + 1] += 1;
    }
    for b in 0..num_buckets {
        bucket_offsets[b + 1] += bucket_offsets[b];
    }

    let mut next = bucket_offsets.clone();
    let mut old_to_new = vec![0 as NodeId; n];
    let mut new_to_old = vec![0 as NodeId; n];
    for (v, &b) in buckets.iter().enumerate() {
        old_to_new[v] = next[b] as NodeId;
        new_to_old[next[b]] = v as NodeId;
        next[b] += 1;
    }

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(graph.raw_targets().len());
    let mut edge_weights = Vec::with_capacity(graph.raw_targets().len());
    let mut node_weights = Vec::with_capacity(n);
    for &old in &new_to_old {
        for (u, w) in graph.neighbors(old) {
            targets.push(old_to_new[u as usize]);
            edge_weights.push(w);
        }
        offsets.push(targets.len());
        node_weights.push(graph.node_weight(old));
    }

    let rearranged =
        Graph::from_csr(offsets, targets, edge_weights, node_weights).with_bucket_offsets(bucket_offsets);
    (rearranged, old_to_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::metrics::edge_cut;
    use crate::partition::Partition;

    #[test]
    fn bucket_boundaries() {
        assert_eq!(degree_bucket(0), 0);
        assert_eq!(degree_bucket(1), 0);
        assert_eq!(degree_bucket(2), 1);
        assert_eq!(degree_bucket(3), 1);
        assert_eq!(degree_bucket(4), 2);
        assert_eq!(degree_bucket(7), 2);
        assert_eq!(degree_bucket(8), 3);
    }

    #[test]
    fn star_center_goes_last() {
        let (g, perm) = rearrange_by_degree_buckets(&star(4));
        assert_eq!(perm[0], 4);
        assert_eq!(g.degree(4), 4);
        let offsets = g.bucket_offsets().unwrap();
        assert_eq!(offsets, &[0, 4, 4, 5]);
    }

    #[test]
    fn regular_graph_keeps_identity() {
        let (g, perm) = rearrange_by_degree_buckets(&cycle(6));
        assert_eq!(perm, (0..6).collect::<Vec<_>>());
        assert_eq!(g.bucket_ranges(), vec![0..6]);
    }

    #[test]
    fn path_relabeling_preserves_cut() {
        let original = path(4);
        let (g, perm) = rearrange_by_degree_buckets(&original);
        assert_eq!(g.bucket_ranges(), vec![0..2, 2..4]);
        // endpoints first, inner nodes second
        assert!(perm[0] < 2 && perm[3] < 2);
        assert!(perm[1] >= 2 && perm[2] >= 2);

        let blocks = vec![0, 0, 1, 1];
        let mut permuted = vec![0; 4];
        for v in 0..4 {
            permuted[perm[v] as usize] = blocks[v];
        }
        let before = edge_cut(&original, &Partition::from_blocks(&original, blocks, 2).unwrap());
        let after = edge_cut(&g, &Partition::from_blocks(&g, permuted, 2).unwrap());
        assert_eq!(before, 1);
        assert_eq!(after, before);
    }

    #[test]
    fn bucket_invariant_holds() {
        let g = grid(5, 4);
        let (r, _) = rearrange_by_degree_buckets(&g);
        let offsets = r.bucket_offsets().unwrap();
        for b in 0..offsets.len() - 1 {
            for v in offsets[b]..offsets[b + 1] {
                assert_eq!(degree_bucket(r.degree(v as NodeId)), b);
            }
        }
    }
}
