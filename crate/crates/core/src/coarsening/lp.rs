//! Size-constrained label propagation clustering.

use std::cell::RefCell;
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, AtomicUsize, Ordering};

use rand::Rng as _;
use rayon::prelude::*;
use thread_local::ThreadLocal;

use super::CoarseningParams;
use crate::graph::{Clustering, EdgeWeight, Graph, NodeId, NodeWeight, NO_CLUSTER};
use crate::util::order::ChunkedOrder;
use crate::util::random::{mix_seed, rng_from_seed, Rng};
use crate::util::rating::{DenseRatingMap, RatingMap, SparseRatingMap};

const TIE_BREAK_SALT: u64 = 0x7469_6521;

/// Outcome of rating one node's neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterChoice {
    /// The cluster the node should belong to (possibly its current one).
    pub cluster: NodeId,
    /// Total edge weight from the node to `cluster`.
    pub rating: EdgeWeight,
    /// The best-rated neighboring cluster, when it beat `cluster` but was too
    /// heavy to join.
    pub favored: Option<NodeId>,
}

/// Rates the clusters around `v` and picks the one with the highest connecting
/// edge weight among those that can take `v` without exceeding `max_weight`.
/// The current cluster is kept unless another admissible cluster is rated
/// strictly higher; ties among better clusters are broken uniformly at random.
pub fn select_cluster(
    graph: &Graph,
    v: NodeId,
    cluster_of: &[NodeId],
    cluster_weights: &[NodeWeight],
    max_weight: NodeWeight,
    rng: &mut Rng,
) -> ClusterChoice {
    let mut map = DenseRatingMap::new(cluster_weights.len());
    choose(
        graph,
        v,
        &mut map,
        |u| cluster_of[u as usize],
        |c| cluster_weights[c as usize],
        max_weight,
        rng,
    )
}

#[inline]
fn choose<M: RatingMap>(
    graph: &Graph,
    v: NodeId,
    map: &mut M,
    cluster_of: impl Fn(NodeId) -> NodeId,
    cluster_weight: impl Fn(NodeId) -> NodeWeight,
    max_weight: NodeWeight,
    rng: &mut Rng,
) -> ClusterChoice {
    let own = cluster_of(v);
    let weight = graph.node_weight(v);
    for (u, w) in graph.neighbors(v) {
        map.add(cluster_of(u), w);
    }
    let own_rating = map.get(own);
    let mut best = own;
    let mut best_rating = own_rating;
    let mut ties = 0u32;
    let mut top = NO_CLUSTER;
    let mut top_rating = 0;
    let mut top_admissible = true;
    map.for_each(|c, rating| {
        if c == own {
            return;
        }
        let admissible = cluster_weight(c) + weight <= max_weight;
        if rating > top_rating {
            top = c;
            top_rating = rating;
            top_admissible = admissible;
        }
        if !admissible || rating < best_rating {
            return;
        }
        if rating > best_rating {
            best = c;
            best_rating = rating;
            ties = 1;
        } else if best != own {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = c;
            }
        }
    });
    map.clear();
    let favored = (top != NO_CLUSTER && !top_admissible && top_rating > best_rating).then_some(top);
    ClusterChoice {
        cluster: best,
        rating: best_rating,
        favored,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LpReport {
    /// Rounds executed, including the final round that moved nothing.
    pub rounds: usize,
    pub moves: usize,
}

struct Maps {
    sparse: SparseRatingMap,
    dense: Option<DenseRatingMap>,
}

/// Clusters the graph starting from singletons. See
/// [`lp_cluster_with_report`].
pub fn lp_cluster(graph: &Graph, max_weight: NodeWeight, params: &CoarseningParams, seed: u64) -> Clustering {
    lp_cluster_with_report(graph, max_weight, params, seed).0
}

/// Size-constrained label propagation.
///
/// Nodes are visited bucket by bucket in increasing degree order; within a
/// bucket, chunks are processed in parallel in shuffled order. A node is only
/// revisited once one of its neighbors has changed cluster or if its best
/// cluster was too heavy to join. Cluster weights
/// are updated atomically without rollback, so concurrent moves may overshoot
/// `max_weight` slightly; with one thread the limit holds exactly.
pub fn lp_cluster_with_report(
    graph: &Graph,
    max_weight: NodeWeight,
    params: &CoarseningParams,
    seed: u64,
) -> (Clustering, LpReport) {
    let n = graph.n();
    let labels: Vec<AtomicU32> = (0..n as NodeId).into_par_iter().map(AtomicU32::new).collect();
    let weights: Vec<AtomicU64> = graph.node_weights().par_iter().map(|&w| AtomicU64::new(w)).collect();
    let favored: Vec<AtomicU32> = (0..n).into_par_iter().map(|_| AtomicU32::new(NO_CLUSTER)).collect();
    let active: Vec<AtomicBool> = (0..n).into_par_iter().map(|_| AtomicBool::new(true)).collect();

    let order = ChunkedOrder::new(graph, params.chunk_size);
    let maps: ThreadLocal<RefCell<Maps>> = ThreadLocal::new();
    let mut report = LpReport::default();

    for round in 0..params.max_lp_rounds {
        report.rounds += 1;
        let moved = AtomicUsize::new(0);
        for bucket in order.round(mix_seed(seed, round as u64)) {
            bucket.par_iter().for_each(|chunk| {
                let mut maps = maps
                    .get_or(|| {
                        RefCell::new(Maps {
                            sparse: SparseRatingMap::with_capacity(params.local_rating_map_capacity),
                            dense: None,
                        })
                    })
                    .borrow_mut();
                let maps = &mut *maps;
                let mut rng = rng_from_seed(mix_seed(chunk.seed, TIE_BREAK_SALT));
                let mut local_moves = 0;
                for v in chunk.shuffled_nodes() {
                    if !active[v as usize].swap(false, Ordering::Relaxed) {
                        continue;
                    }
                    let label_of = |u: NodeId| labels[u as usize].load(Ordering::Relaxed);
                    let weight_of = |c: NodeId| weights[c as usize].load(Ordering::Relaxed);
                    let choice = if graph.degree(v) < params.high_degree_threshold {
                        choose(graph, v, &mut maps.sparse, label_of, weight_of, max_weight, &mut rng)
                    } else {
                        let dense = maps.dense.get_or_insert_with(|| DenseRatingMap::new(n));
                        choose(graph, v, dense, label_of, weight_of, max_weight, &mut rng)
                    };
                    favored[v as usize].store(choice.favored.unwrap_or(NO_CLUSTER), Ordering::Relaxed);
                    if choice.favored.is_some() {
                        // blocked by weight only; the favored cluster may shed
                        // nodes later without any neighbor of `v` moving
                        active[v as usize].store(true, Ordering::Relaxed);
                    }
                    let own = labels[v as usize].load(Ordering::Relaxed);
                    if choice.cluster == own {
                        continue;
                    }
                    let w = graph.node_weight(v);
                    weights[choice.cluster as usize].fetch_add(w, Ordering::Relaxed);
                    weights[own as usize].fetch_sub(w, Ordering::Relaxed);
                    labels[v as usize].store(choice.cluster, Ordering::Relaxed);
                    for &u in graph.adjacent_nodes(v) {
                        active[u as usize].store(true, Ordering::Relaxed);
                    }
                    local_moves += 1;
                }
                moved.fetch_add(local_moves, Ordering::Relaxed);
            });
        }
        let moved = moved.into_inner();
        report.moves += moved;
        if moved == 0 {
            break;
        }
    }

    let clustering = Clustering::from_parts(
        labels.into_iter().map(AtomicU32::into_inner).collect(),
        weights.into_iter().map(AtomicU64::into_inner).collect(),
        favored.into_iter().map(AtomicU32::into_inner).collect(),
    );
    (clustering, report)
}

/// Single-threaded label propagation for small graphs. Nodes are visited in
/// one uniformly random order, reused in every round. Same selection and activation rules as
/// [`lp_cluster_with_report`], exact weight enforcement.
pub fn lp_cluster_sequential(graph: &Graph, max_weight: NodeWeight, max_rounds: usize, rng: &mut Rng) -> Clustering {
    use rand::seq::SliceRandom;

    let n = graph.n();
    let mut labels: Vec<NodeId> = graph.nodes().collect();
    let mut weights = graph.node_weights().to_vec();
    let mut favored = vec![NO_CLUSTER; n];
    let mut active = vec![true; n];
    let mut map = DenseRatingMap::new(n);
    let mut order: Vec<NodeId> = graph.nodes().collect();
    order.shuffle(rng);
    for _ in 0..max_rounds {
        let mut moved = 0;
        for &v in &order {
            if !std::mem::take(&mut active[v as usize]) {
                continue;
            }
            let choice = choose(
                graph,
                v,
                &mut map,
                |u| labels[u as usize],
                |c| weights[c as usize],
                max_weight,
                rng,
            );
            favored[v as usize] = choice.favored.unwrap_or(NO_CLUSTER);
            if choice.favored.is_some() {
                active[v as usize] = true;
            }
            let own = labels[v as usize];
            if choice.cluster == own {
                continue;
            }
            let w = graph.node_weight(v);
            weights[choice.cluster as usize] += w;
            weights[own as usize] -= w;
            labels[v as usize] = choice.cluster;
            for &u in graph.adjacent_nodes(v) {
                active[u as usize] = true;
            }
            moved += 1;
        }
        if moved == 0 {
            break;
        }
    }
    Clustering::from_parts(labels, weights, favored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::rearrange_by_degree_buckets;

    fn params() -> CoarseningParams {
        CoarseningParams::new(2, 0.03)
    }

    #[test]
    fn two_triangles_cluster_into_triangles() {
        let (g, perm) = rearrange_by_degree_buckets(&two_triangles());
        for seed in 0..200 {
            let c = lp_cluster(&g, 3, &params(), seed);
            let label = |v: usize| c.cluster_of(perm[v]);
            assert_eq!(label(0), label(1));
            assert_eq!(label(1), label(2));
            assert_eq!(label(3), label(4));
            assert_eq!(label(4), label(5));
            assert_ne!(label(0), label(3));
        }
    }

    #[test]
    fn tiny_limit_keeps_singletons() {
        let g = grid(6, 6);
        let c = lp_cluster(&g, 1, &params(), 1);
        assert_eq!(c.num_clusters(), 36);
    }

    #[test]
    fn star_with_limit_two() {
        let (g, perm) = rearrange_by_degree_buckets(&star(4));
        let center = perm[0];
        for seed in 0..10 {
            let c = lp_cluster(&g, 2, &params(), seed);
            let center_label = c.cluster_of(center);
            let with_center: Vec<NodeId> = g.nodes().filter(|&v| v != center && c.cluster_of(v) == center_label).collect();
            assert_eq!(with_center.len(), 1);
            for v in g.nodes().filter(|&v| v != center && v != with_center[0]) {
                assert_eq!(c.favored_cluster(v), Some(center_label));
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (g, _) = rearrange_by_degree_buckets(&grid(40, 40));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = pool.install(|| lp_cluster(&g, 10, &params(), 17));
        let b = pool.install(|| lp_cluster(&g, 10, &params(), 17));
        assert_eq!(a, b);
    }

    #[test]
    fn weights_track_labels() {
        let (g, _) = rearrange_by_degree_buckets(&grid(30, 20));
        let c = lp_cluster(&g, 7, &params(), 4);
        let recomputed = Clustering::from_labels(&g, c.labels().to_vec());
        assert_eq!(recomputed.cluster_weights(), c.cluster_weights());
        if rayon::current_num_threads() == 1 {
            assert!(c.cluster_weights().iter().all(|&w| w <= 7));
        }
    }

    #[test]
    fn high_degree_nodes_use_dense_map() {
        let g = star(50);
        let p = CoarseningParams {
            high_degree_threshold: 4,
            ..params()
        };
        let c = lp_cluster(&g, 3, &p, 2);
        let recomputed = Clustering::from_labels(&g, c.labels().to_vec());
        assert_eq!(recomputed.cluster_weights(), c.cluster_weights());
    }

    #[test]
    fn sequential_variant_respects_limit() {
        let g = grid(20, 20);
        for seed in 0..5 {
            let c = lp_cluster_sequential(&g, 6, 5, &mut rng_from_seed(seed));
            assert!(c.cluster_weights().iter().all(|&w| w <= 6));
            assert!(c.num_clusters() < 400);
            let recomputed = Clustering::from_labels(&g, c.labels().to_vec());
            assert_eq!(recomputed.cluster_weights(), c.cluster_weights());
        }
    }

    #[test]
    fn selection_prefers_own_cluster_on_ties() {
        // path 0-1-2 with 0 and 1 clustered: node 1 sees rating 1 to its own
        // cluster and rating 1 to {2}
        let g = path(3);
        let mut rng = rng_from_seed(0);
        let choice = select_cluster(&g, 1, &[0, 0, 2], &[2, 0, 1], 10, &mut rng);
        assert_eq!(choice.cluster, 0);
        assert_eq!(choice.rating, 1);
        assert_eq!(choice.favored, None);
    }

    #[test]
    fn selection_records_favored_cluster() {
        let g = path(3);
        let mut rng = rng_from_seed(0);
        let choice = select_cluster(&g, 2, &[0, 0, 2], &[2, 0, 1], 2, &mut rng);
        assert_eq!(choice.cluster, 2);
        assert_eq!(choice.favored, Some(0));
    }
}
