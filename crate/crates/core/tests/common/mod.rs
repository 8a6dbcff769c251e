//! Shared helpers for the integration tests: small random graphs and
//! brute-force reference implementations.

#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeMap;

use deeppart::graph::build_graph;
use deeppart::{BlockId, EdgeWeight, Graph, NodeId, NodeWeight, Rng};
use rand::Rng as _;

/// A graph together with the data it was built from.
pub struct SmallGraph {
    pub graph: Graph,
    pub edges: Vec<(NodeId, NodeId, EdgeWeight)>,
    pub node_weights: Vec<NodeWeight>,
}

/// Random simple graph with `1..=max_n` nodes, random density, node weights in
/// `1..=max_node_weight` and edge weights in `1..=max_edge_weight`.
pub fn random_small_graph(
    rng: &mut Rng,
    max_n: usize,
    max_node_weight: NodeWeight,
    max_edge_weight: EdgeWeight,
) -> SmallGraph {
    let n = rng.random_range(1..=max_n);
    let density: f64 = rng.random();
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            if rng.random::<f64>() < density {
                edges.push((u, v, rng.random_range(1..=max_edge_weight)));
            }
        }
    }
    let node_weights: Vec<NodeWeight> = (0..n).map(|_| rng.random_range(1..=max_node_weight)).collect();
    let graph = build_graph(n, &edges, Some(node_weights.clone())).unwrap();
    SmallGraph {
        graph,
        edges,
        node_weights,
    }
}

pub fn random_labels(rng: &mut Rng, n: usize, k: u32) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// Cut of `labels` computed from an edge list.
pub fn cut_from_edges(edges: &[(NodeId, NodeId, EdgeWeight)], labels: &[BlockId]) -> EdgeWeight {
    edges
        .iter()
        .filter(|&&(u, v, _)| labels[u as usize] != labels[v as usize])
        .map(|&(_, _, w)| w)
        .sum()
}

/// Weight from `v` to every label among its neighbors, from the edge list.
pub fn connection_weights(
    edges: &[(NodeId, NodeId, EdgeWeight)],
    labels: &[u32],
    v: NodeId,
) -> BTreeMap<u32, EdgeWeight> {
    let mut to = BTreeMap::new();
    for &(a, b, w) in edges {
        let other = if a == v {
            b
        } else if b == v {
            a
        } else {
            continue;
        };
        *to.entry(labels[other as usize]).or_insert(0) += w;
    }
    to
}

/// Minimum cut over all bipartitions whose sides weigh at most `max_side`,
/// by enumeration. `None` if no bipartition fits.
pub fn brute_force_bisection(graph: &Graph, max_side: NodeWeight) -> Option<EdgeWeight> {
    let n = graph.n();
    assert!(n <= 20, "enumeration is exponential");
    let total = graph.total_node_weight();
    let edges: Vec<_> = graph.edges().collect();
    let mut best: Option<EdgeWeight> = None;
    // fixing node 0 on side 0 halves the search
    for mask in 0u32..(1 << (n - 1)) {
        let side = |v: NodeId| if v == 0 { 0 } else { (mask >> (v - 1)) & 1 };
        let w1: NodeWeight = graph.nodes().filter(|&v| side(v) == 1).map(|v| graph.node_weight(v)).sum();
        if w1 > max_side || total - w1 > max_side {
            continue;
        }
        let cut = edges.iter().filter(|&&(u, v, _)| side(u) != side(v)).map(|&(_, _, w)| w).sum();
        best = Some(best.map_or(cut, |b: EdgeWeight| b.min(cut)));
    }
    best
}

/// Random graph with `n` nodes and about `n * avg_degree / 2` edges; repeated
/// pairs are merged by the builder.
pub fn random_graph(
    rng: &mut Rng,
    n: usize,
    avg_degree: f64,
    max_node_weight: NodeWeight,
    max_edge_weight: EdgeWeight,
) -> Graph {
    let m = (n as f64 * avg_degree / 2.0) as usize;
    let mut edges = Vec::with_capacity(m);
    if n >= 2 {
        for _ in 0..m {
            let u = rng.random_range(0..n as NodeId);
            let v = rng.random_range(0..n as NodeId);
            if u != v {
                edges.push((u, v, rng.random_range(1..=max_edge_weight)));
            }
        }
    }
    let node_weights = (0..n).map(|_| rng.random_range(1..=max_node_weight)).collect();
    build_graph(n, &edges, Some(node_weights)).unwrap()
}
