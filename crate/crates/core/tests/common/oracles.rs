//! Exact comparisons against brute-force reference implementations on small
//! random graphs.

use std::collections::{BTreeMap, BTreeSet};

use super::*;
use deeppart::balancer::relative_gain;
use deeppart::coarsening::select_cluster;
use deeppart::graph::{contract, extract_subgraphs, Clustering};
use deeppart::metrics::edge_cut;
use deeppart::{rng_from_seed, BlockId, EdgeWeight, NodeId, NodeWeight, Partition};
use rand::Rng as _;

/// Panics on the first mismatch.
pub fn check_edge_cut(seed: u64, graphs: u64) {
    let mut rng = rng_from_seed(seed);
    for _ in 0..graphs {
        let g = random_small_graph(&mut rng, 32, 5, 9);
        let k = rng.random_range(1..=6);
        let labels = random_labels(&mut rng, g.graph.n(), k);
        let partition = Partition::from_blocks(&g.graph, labels.clone(), k).unwrap();
        assert_eq!(edge_cut(&g.graph, &partition), cut_from_edges(&g.edges, &labels));
    }
}

/// Panics on the first mismatch.
pub fn check_contraction(seed: u64, graphs: u64) {
    let mut rng = rng_from_seed(seed);
    for _ in 0..graphs {
        let g = random_small_graph(&mut rng, 32, 5, 9);
        let n = g.graph.n();
        let clusters = rng.random_range(1..=n as u32);
        // labels are node ids of arbitrary (not necessarily member) nodes
        let pool: Vec<NodeId> = (0..clusters).map(|_| rng.random_range(0..n as NodeId)).collect();
        let labels: Vec<NodeId> = (0..n).map(|_| pool[rng.random_range(0..pool.len())]).collect();

        let used: BTreeSet<NodeId> = labels.iter().copied().collect();
        let dense: BTreeMap<NodeId, NodeId> = used.iter().enumerate().map(|(i, &l)| (l, i as NodeId)).collect();
        let expected_coarse_of: Vec<NodeId> = labels.iter().map(|l| dense[l]).collect();
        let mut expected_weights = vec![0; used.len()];
        for v in 0..n {
            expected_weights[expected_coarse_of[v] as usize] += g.node_weights[v];
        }
        let mut expected_edges: BTreeMap<(NodeId, NodeId), EdgeWeight> = BTreeMap::new();
        for &(u, v, w) in &g.edges {
            let (cu, cv) = (expected_coarse_of[u as usize], expected_coarse_of[v as usize]);
            if cu != cv {
                *expected_edges.entry((cu.min(cv), cu.max(cv))).or_insert(0) += w;
            }
        }

        let level = contract(&g.graph, &Clustering::from_labels(&g.graph, labels));
        assert_eq!(level.coarse_of, expected_coarse_of);
        assert_eq!(level.coarse_graph.node_weights(), &expected_weights[..]);
        let edges: BTreeMap<(NodeId, NodeId), EdgeWeight> =
            level.coarse_graph.edges().map(|(u, v, w)| ((u, v), w)).collect();
        assert_eq!(edges, expected_edges);
        assert_eq!(level.coarse_graph.m(), expected_edges.len());
    }
}

/// Panics on the first mismatch.
pub fn check_subgraph_extraction(seed: u64, graphs: u64) {
    let mut rng = rng_from_seed(seed);
    for _ in 0..graphs {
        let g = random_small_graph(&mut rng, 32, 5, 9);
        let k = rng.random_range(1..=5);
        let labels = random_labels(&mut rng, g.graph.n(), k);
        let partition = Partition::from_blocks(&g.graph, labels.clone(), k).unwrap();
        let subgraphs = extract_subgraphs(&g.graph, &partition);
        assert_eq!(subgraphs.len(), k as usize);
        for (b, sub) in subgraphs.iter().enumerate() {
            let nodes: Vec<NodeId> = (0..g.graph.n() as NodeId).filter(|&v| labels[v as usize] == b as u32).collect();
            let local: BTreeMap<NodeId, NodeId> = nodes.iter().enumerate().map(|(i, &v)| (v, i as NodeId)).collect();
            let weights: Vec<NodeWeight> = nodes.iter().map(|&v| g.node_weights[v as usize]).collect();
            let expected: BTreeMap<(NodeId, NodeId), EdgeWeight> = g
                .edges
                .iter()
                .filter(|&&(u, v, _)| local.contains_key(&u) && local.contains_key(&v))
                .map(|&(u, v, w)| ((local[&u], local[&v]), w))
                .collect();

            assert_eq!(sub.block, b as BlockId);
            assert_eq!(sub.nodes, nodes);
            assert_eq!(sub.graph.node_weights(), &weights[..]);
            let edges: BTreeMap<(NodeId, NodeId), EdgeWeight> =
                sub.graph.edges().map(|(u, v, w)| ((u, v), w)).collect();
            assert_eq!(edges, expected);
        }
    }
}

/// Panics on the first mismatch.
pub fn check_relative_gain(seed: u64, graphs: u64) {
    let mut rng = rng_from_seed(seed);
    for _ in 0..graphs {
        let g = random_small_graph(&mut rng, 32, 6, 9);
        let n = g.graph.n();
        let k = rng.random_range(2..=6);
        let labels = random_labels(&mut rng, n, k);
        let partition = Partition::from_blocks(&g.graph, labels.clone(), k).unwrap();
        let weights = partition.block_weights().to_vec();
        let limits: Vec<NodeWeight> = weights
            .iter()
            .map(|&w| (w as i64 + rng.random_range(-4..=12)).max(0) as NodeWeight)
            .collect();

        for v in 0..n as NodeId {
            let own = labels[v as usize];
            let c = g.node_weights[v as usize];
            let conn = connection_weights(&g.edges, &labels, v);
            let internal = *conn.get(&own).unwrap_or(&0) as i64;
            let candidates: Vec<(i64, BlockId)> = (0..k)
                .filter(|&b| b != own && weights[b as usize] + c <= limits[b as usize])
                .map(|b| (*conn.get(&b).unwrap_or(&0) as i64 - internal, b))
                .collect();

            let (value, target) = relative_gain(&g.graph, &partition, v, &limits);
            match candidates.iter().map(|&(d, _)| d).max() {
                None => {
                    assert_eq!(value, f64::NEG_INFINITY);
                    assert_eq!(target, None);
                }
                Some(d) => {
                    let expected = if d >= 0 {
                        d as f64 * c as f64
                    } else {
                        d as f64 / c as f64
                    };
                    assert_eq!(value, expected, "node {v}");
                    let target = target.expect("a block fits");
                    assert!(candidates.contains(&(d, target)), "node {v}: block {target} does not reach {d}");
                }
            }
        }
    }
}

/// Panics on the first mismatch.
pub fn check_cluster_selection(seed: u64, graphs: u64) {
    let mut rng = rng_from_seed(seed);
    for _ in 0..graphs {
        let g = random_small_graph(&mut rng, 32, 4, 4);
        let n = g.graph.n();
        let clusters = rng.random_range(1..=n as u32);
        let labels: Vec<NodeId> = (0..n).map(|_| rng.random_range(0..clusters)).collect();
        let mut cluster_weights = vec![0; n];
        for v in 0..n {
            cluster_weights[labels[v] as usize] += g.node_weights[v];
        }
        let max_weight = rng.random_range(1..=3 * g.graph.total_node_weight() / clusters as u64 + 1);

        for v in 0..n as NodeId {
            let own = labels[v as usize];
            let w = g.node_weights[v as usize];
            let conn = connection_weights(&g.edges, &labels, v);
            let own_rating = *conn.get(&own).unwrap_or(&0);
            let admissible = |c: NodeId| cluster_weights[c as usize] + w <= max_weight;
            let best_other = conn
                .iter()
                .filter(|&(&c, _)| c != own && admissible(c))
                .map(|(_, &r)| r)
                .max();
            let (allowed, rating): (BTreeSet<NodeId>, EdgeWeight) = match best_other {
                Some(r) if r > own_rating => (
                    conn.iter()
                        .filter(|&(&c, &rc)| c != own && admissible(c) && rc == r)
                        .map(|(&c, _)| c)
                        .collect(),
                    r,
                ),
                _ => ([own].into(), own_rating),
            };
            // first other cluster with the highest rating, in neighbor order
            let mut top: Option<(NodeId, EdgeWeight)> = None;
            let mut neighbors: Vec<NodeId> = g
                .edges
                .iter()
                .filter_map(|&(a, b, _)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
                .collect();
            neighbors.sort_unstable();
            for u in neighbors {
                let c = labels[u as usize];
                if c != own && top.is_none_or(|(_, r)| conn[&c] > r) {
                    top = Some((c, conn[&c]));
                }
            }
            let favored = top.filter(|&(c, r)| !admissible(c) && r > rating).map(|(c, _)| c);

            for seed in 0..3 {
                let mut tie_rng = rng_from_seed(seed);
                let choice = select_cluster(&g.graph, v, &labels, &cluster_weights, max_weight, &mut tie_rng);
                assert!(allowed.contains(&choice.cluster), "node {v}: {choice:?} not in {allowed:?}");
                assert_eq!(choice.rating, rating, "node {v}");
                assert_eq!(choice.favored, favored, "node {v}");
            }
        }
    }
}
