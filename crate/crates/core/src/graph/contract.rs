use std::cell::RefCell;

use rayon::prelude::*;
use thread_local::ThreadLocal;

use super::{EdgeWeight, Graph, NodeId, NodeWeight};
use crate::util::rating::{DenseRatingMap, RatingMap};

/// Marker for "no cluster" in the favored-cluster table.
pub const NO_CLUSTER: NodeId = NodeId::MAX;

/// Assignment of nodes to clusters. Cluster labels live in `0..n`; a label is
/// typically the id of the node that founded the cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    cluster_of: Vec<NodeId>,
    cluster_weights: Vec<NodeWeight>,
    favored: Vec<NodeId>,
}

impl Clustering {
    /// Every node in its own cluster.
    pub fn singletons(graph: &Graph) -> Self {
        Self {
            cluster_of: graph.nodes().collect(),
            cluster_weights: graph.node_weights().to_vec(),
            favored: vec![NO_CLUSTER; graph.n()],
        }
    }

    /// Builds a clustering from explicit labels (each `< n`).
    pub fn from_labels(graph: &Graph, cluster_of: Vec<NodeId>) -> Self {
        assert_eq!(cluster_of.len(), graph.n());
        let mut cluster_weights = vec![0; graph.n()];
        for (v, &c) in cluster_of.iter().enumerate() {
            cluster_weights[c as usize] += graph.node_weight(v as NodeId);
        }
        Self {
            cluster_of,
            cluster_weights,
            favored: vec![NO_CLUSTER; graph.n()],
        }
    }

    pub(crate) fn from_parts(
        cluster_of: Vec<NodeId>,
        cluster_weights: Vec<NodeWeight>,
        favored: Vec<NodeId>,
    ) -> Self {
        Self {
            cluster_of,
            cluster_weights,
            favored,
        }
    }

    #[inline]
    pub fn cluster_of(&self, v: NodeId) -> NodeId {
        self.cluster_of[v as usize]
    }

    pub fn labels(&self) -> &[NodeId] {
        &self.cluster_of
    }

    #[inline]
    pub fn cluster_weight(&self, label: NodeId) -> NodeWeight {
        self.cluster_weights[label as usize]
    }

    pub fn cluster_weights(&self) -> &[NodeWeight] {
        &self.cluster_weights
    }

    /// The heaviest-rated neighboring cluster that `v` could not join because
    /// of the weight limit, if any.
    pub fn favored_cluster(&self, v: NodeId) -> Option<NodeId> {
        match self.favored[v as usize] {
            NO_CLUSTER => None,
            c => Some(c),
        }
    }

    pub fn has_favored_clusters(&self) -> bool {
        self.favored.iter().any(|&c| c != NO_CLUSTER)
    }

    /// Number of clusters with at least one node.
    pub fn num_clusters(&self) -> usize {
        let mut used = vec![false; self.cluster_of.len()];
        let mut count = 0;
        for &c in &self.cluster_of {
            if !used[c as usize] {
                used[c as usize] = true;
                count += 1;
            }
        }
        count
    }

    /// Moves `v` into cluster `label`, keeping the weights consistent.
    pub(crate) fn assign(&mut self, v: NodeId, label: NodeId, weight: NodeWeight) {
        let old = self.cluster_of[v as usize];
        self.cluster_weights[old as usize] -= weight;
        self.cluster_weights[label as usize] += weight;
        self.cluster_of[v as usize] = label;
    }
}

/// A coarse graph and the mapping from the finer graph's nodes onto it.
#[derive(Debug, Clone)]
pub struct HierarchyLevel {
    pub coarse_graph: Graph,
    pub coarse_of: Vec<NodeId>,
}

/// Collapses every cluster into one node. Coarse node weights are cluster
/// weights; parallel coarse edges are merged by summing fine edge weights and
/// intra-cluster edges vanish. Coarse ids are dense and ordered by label.
pub fn contract(graph: &Graph, clustering: &Clustering) -> HierarchyLevel {
    let n = graph.n();
    let labels = clustering.labels();

    let mut dense = vec![NodeId::MAX; n];
    for &c in labels {
        dense[c as usize] = 0;
    }
    let mut n_coarse = 0usize;
    for slot in dense.iter_mut() {
        if *slot == 0 {
            *slot = n_coarse as NodeId;
            n_coarse += 1;
        }
    }
    let coarse_of: Vec<NodeId> = labels.par_iter().map(|&c| dense[c as usize]).collect();
    drop(dense);

    // Fine nodes grouped by coarse node, ascending fine id inside a group.
    let mut member_offsets = vec![0usize; n_coarse + 1];
    for &c in &coarse_of {
        member_offsets[c as usize + 1] += 1;
    }
    for c in 0..n_coarse {
        member_offsets[c + 1] += member_offsets[c];
    }
    let mut members = vec![0 as NodeId; n];
    let mut fill = member_offsets.clone();
    for (v, &c) in coarse_of.iter().enumerate() {
        members[fill[c as usize]] = v as NodeId;
        fill[c as usize] += 1;
    }
    drop(fill);

    let node_weights: Vec<NodeWeight> = (0..n_coarse)
        .into_par_iter()
        .map(|c| {
            members[member_offsets[c]..member_offsets[c + 1]]
                .iter()
                .map(|&v| graph.node_weight(v))
                .sum()
        })
        .collect();

    let chunk_size = (n_coarse / (rayon::current_num_threads() * 16)).clamp(256, 1 << 16);
    let maps: ThreadLocal<RefCell<DenseRatingMap>> = ThreadLocal::new();
    let chunks: Vec<(Vec<usize>, Vec<NodeId>, Vec<EdgeWeight>)> = (0..n_coarse)
        .into_par_iter()
        .step_by(chunk_size)
        .map(|start| {
            let end = (start + chunk_size).min(n_coarse);
            let mut map = maps
                .get_or(|| RefCell::new(DenseRatingMap::new(n_coarse)))
                .borrow_mut();
            let mut degrees = Vec::with_capacity(end - start);
            let mut targets = Vec::new();
            let mut weights = Vec::new();
            for c in start..end {
                for &v in &members[member_offsets[c]..member_offsets[c + 1]] {
                    for (u, w) in graph.neighbors(v) {
                        let cu = coarse_of[u as usize];
                        if cu as usize != c {
                            map.add(cu, w);
                        }
                    }
                }
                let before = targets.len();
                map.for_each(|t, w| {
                    targets.push(t);
                    weights.push(w);
                });
                map.clear();
                degrees.push(targets.len() - before);
            }
            (degrees, targets, weights)
        })
        .collect();

    let total: usize = chunks.iter().map(|(_, t, _)| t.len()).sum();
    let mut offsets = Vec::with_capacity(n_coarse + 1);
    offsets.push(0usize);
    let mut targets = Vec::with_capacity(total);
    let mut edge_weights = Vec::with_capacity(total);
    for (degrees, t, w) in chunks {
        for d in degrees {
            let last = *offsets.last().unwrap();
            offsets.push(last + d);
        }
        targets.extend(t);
        edge_weights.extend(w);
    }

    HierarchyLevel {
        coarse_graph: Graph::from_csr(offsets, targets, edge_weights, node_weights),
        coarse_of,
    }
}

/// Single-threaded [`contract`] for small graphs; same result.
pub fn contract_sequential(graph: &Graph, clustering: &Clustering) -> HierarchyLevel {
    let n = graph.n();
    let mut dense = vec![NodeId::MAX; n];
    for &c in clustering.labels() {
        dense[c as usize] = 0;
    }
    let mut n_coarse = 0;
    for slot in dense.iter_mut() {
        if *slot == 0 {
            *slot = n_coarse;
            n_coarse += 1;
        }
    }
    let coarse_of: Vec<NodeId> = clustering.labels().iter().map(|&c| dense[c as usize]).collect();
    let n_coarse = n_coarse as usize;

    let mut member_offsets = vec![0usize; n_coarse + 1];
    for &c in &coarse_of {
        member_offsets[c as usize + 1] += 1;
    }
    for c in 0..n_coarse {
        member_offsets[c + 1] += member_offsets[c];
    }
    // reuse `dense` as the member list
    let members = &mut dense;
    let mut fill = member_offsets.clone();
    for (v, &c) in coarse_of.iter().enumerate() {
        members[fill[c as usize]] = v as NodeId;
        fill[c as usize] += 1;
    }

    let mut map = DenseRatingMap::new(n_coarse);
    let mut offsets = Vec::with_capacity(n_coarse + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(2 * graph.m());
    let mut edge_weights = Vec::with_capacity(2 * graph.m());
    let mut node_weights = Vec::with_capacity(n_coarse);
    for c in 0..n_coarse {
        let mut weight = 0;
        for &v in &members[member_offsets[c]..member_offsets[c + 1]] {
            weight += graph.node_weight(v);
            for (u, w) in graph.neighbors(v) {
                let cu = coarse_of[u as usize];
                if cu as usize != c {
                    map.add(cu, w);
                }
            }
        }
        map.for_each(|t, w| {
            targets.push(t);
            edge_weights.push(w);
        });
        map.clear();
        offsets.push(targets.len());
        node_weights.push(weight);
    }

    HierarchyLevel {
        coarse_graph: Graph::from_csr(offsets, targets, edge_weights, node_weights),
        coarse_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn sequential_matches_parallel() {
        use rand::Rng as _;
        let g = crate::generate::random_geometric(500, 6.0, 4).unwrap();
        let mut rng = crate::util::random::rng_from_seed(9);
        for clusters in [1, 7, 60, 500] {
            let labels: Vec<NodeId> = (0..g.n()).map(|_| rng.random_range(0..clusters)).collect();
            let clustering = Clustering::from_labels(&g, labels);
            let a = contract(&g, &clustering);
            let b = contract_sequential(&g, &clustering);
            assert_eq!(a.coarse_graph, b.coarse_graph);
            assert_eq!(a.coarse_of, b.coarse_of);
        }
    }

    #[test]
    fn path_two_clusters() {
        let g = path(3);
        let level = contract(&g, &Clustering::from_labels(&g, vec![0, 0, 2]));
        let c = &level.coarse_graph;
        assert_eq!(c.n(), 2);
        assert_eq!(c.node_weights(), &[2, 1]);
        assert_eq!(c.edges().collect::<Vec<_>>(), vec![(0, 1, 1)]);
        assert_eq!(level.coarse_of, vec![0, 0, 1]);
    }

    #[test]
    fn triangle_into_one_node() {
        let g = cycle(3);
        let level = contract(&g, &Clustering::from_labels(&g, vec![1, 1, 1]));
        assert_eq!(level.coarse_graph.n(), 1);
        assert_eq!(level.coarse_graph.node_weights(), &[3]);
        assert_eq!(level.coarse_graph.m(), 0);
    }

    #[test]
    fn four_cycle_halves() {
        // edges 0-1, 1-2, 2-3, 3-0; crossing edges between {0,1} and {2,3}
        // are 1-2 and 3-0, so the coarse edge weighs 2
        let g = cycle(4);
        let level = contract(&g, &Clustering::from_labels(&g, vec![0, 0, 2, 2]));
        assert_eq!(level.coarse_graph.edges().collect::<Vec<_>>(), vec![(0, 1, 2)]);
    }

    #[test]
    fn singleton_clustering_is_isomorphic() {
        let g = grid(4, 3);
        let level = contract(&g, &Clustering::singletons(&g));
        assert_eq!(level.coarse_graph.n(), g.n());
        let mut a: Vec<_> = level.coarse_graph.edges().collect();
        let mut b: Vec<_> = g.edges().collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn clustering_weights_and_counts() {
        let g = path(4);
        let mut c = Clustering::singletons(&g);
        assert_eq!(c.num_clusters(), 4);
        c.assign(1, 0, 1);
        assert_eq!(c.cluster_weight(0), 2);
        assert_eq!(c.cluster_weight(1), 0);
        assert_eq!(c.num_clusters(), 3);
        assert_eq!(c.favored_cluster(2), None);
    }
}
