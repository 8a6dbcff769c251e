//! Graph coarsening by size-constrained label propagation.

mod lp;
mod two_hop;

pub use lp::{lp_cluster, lp_cluster_sequential, lp_cluster_with_report, select_cluster, ClusterChoice, LpReport};
pub use two_hop::two_hop_merge;

use crate::error::{Error, Result};
use crate::graph::{contract, rearrange_by_degree_buckets, BlockId, Graph, HierarchyLevel, NodeId, NodeWeight};
use crate::util::order::DEFAULT_CHUNK_SIZE;
use crate::util::random::mix_seed;
use crate::util::rating::{DENSE_DEGREE_THRESHOLD, SPARSE_CAPACITY};

/// Default contraction limit `C`.
pub const DEFAULT_CONTRACTION_LIMIT: usize = 2000;

/// Fraction of clusters (relative to `n`) above which two-hop merging kicks in
/// and down to which it tries to shrink the clustering.
pub const TWO_HOP_SHRINK_TARGET: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningParams {
    /// Contraction limit `C`.
    pub contraction_limit: usize,
    /// The number of blocks of the final partition.
    pub target_k: BlockId,
    pub epsilon: f64,
    pub max_lp_rounds: usize,
    /// A level that shrinks by less than this fraction ends coarsening.
    pub shrink_convergence_factor: f64,
    pub chunk_size: usize,
    /// Slots in the per-thread sparse rating map.
    pub local_rating_map_capacity: usize,
    /// Nodes with at least this degree are rated with a dense per-thread array.
    pub high_degree_threshold: usize,
}

impl CoarseningParams {
    pub fn new(target_k: BlockId, epsilon: f64) -> Self {
        Self {
            contraction_limit: DEFAULT_CONTRACTION_LIMIT,
            target_k,
            epsilon,
            max_lp_rounds: 5,
            shrink_convergence_factor: 0.05,
            chunk_size: DEFAULT_CHUNK_SIZE,
            local_rating_map_capacity: SPARSE_CAPACITY,
            high_degree_threshold: DENSE_DEGREE_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.contraction_limit < 2 {
            return Err(Error::InvalidParameter("contraction limit must be at least 2".into()));
        }
        if self.max_lp_rounds == 0 {
            return Err(Error::InvalidParameter("at least one label propagation round is required".into()));
        }
        if !(self.shrink_convergence_factor > 0.0 && self.shrink_convergence_factor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrink convergence factor must lie in (0, 1), got {}",
                self.shrink_convergence_factor
            )));
        }
        if self.high_degree_threshold.saturating_mul(3) > self.local_rating_map_capacity.next_power_of_two() {
            return Err(Error::InvalidParameter(
                "high-degree threshold must stay at or below a third of the rating map capacity".into(),
            ));
        }
        Ok(())
    }
}

/// Maximum cluster weight `U = eps * c(V) / k'`.
///
/// `k'` starts at `k` and is halved (never below 2) while the graph has fewer
/// than `(k'/2) * C` nodes, so small graphs are allowed heavier clusters.
pub fn max_cluster_weight(
    total_weight: NodeWeight,
    k: BlockId,
    epsilon: f64,
    n: usize,
    contraction_limit: usize,
) -> f64 {
    let mut k_prime = k.max(2) as u64;
    while k_prime > 2 && (n as u64) < (k_prime / 2) * contraction_limit as u64 {
        k_prime = (k_prime / 2).max(2);
    }
    epsilon * total_weight as f64 / k_prime as f64
}

/// What happened while coarsening one level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningStats {
    pub fine_nodes: usize,
    pub coarse_nodes: usize,
    /// `U` as a real number; clusters are limited to its floor.
    pub max_cluster_weight: f64,
    /// Heaviest cluster formed. Parallel label propagation enforces the limit
    /// only weakly, so this may exceed the limit by a few node weights.
    pub heaviest_cluster: NodeWeight,
    pub lp_rounds: usize,
    pub two_hop_merges: usize,
}

impl CoarseningStats {
    /// Weight by which the heaviest cluster exceeds the limit.
    pub fn overshoot(&self) -> NodeWeight {
        self.heaviest_cluster.saturating_sub(self.max_cluster_weight.floor() as NodeWeight)
    }
}

#[derive(Debug, Clone)]
pub enum CoarsenOutcome {
    /// A contracted level. The coarse graph is rearranged by degree buckets and
    /// `coarse_of` refers to its node ids.
    Coarsened(HierarchyLevel, CoarseningStats),
    /// The level did not shrink enough; the input graph is final.
    Converged(CoarseningStats),
}

/// Clusters `graph`, merges leftover singletons through shared favored
/// clusters and contracts the result.
///
/// Requires `n > 2C`.
pub fn coarsen_level(graph: &Graph, params: &CoarseningParams, seed: u64) -> Result<CoarsenOutcome> {
    let n = graph.n();
    let limit = 2 * params.contraction_limit;
    if n <= limit {
        return Err(Error::NotCoarsenable { n, limit });
    }
    let u = max_cluster_weight(
        graph.total_node_weight(),
        params.target_k,
        params.epsilon,
        n,
        params.contraction_limit,
    );
    let max_weight = u.floor() as NodeWeight;
    let (clustering, report) = lp_cluster_with_report(graph, max_weight, params, mix_seed(seed, 1));
    let before = clustering.num_clusters();
    let clustering = two_hop_merge(graph, clustering, max_weight, TWO_HOP_SHRINK_TARGET);
    let clusters = clustering.num_clusters();
    let mut stats = CoarseningStats {
        fine_nodes: n,
        coarse_nodes: clusters,
        max_cluster_weight: u,
        heaviest_cluster: clustering.cluster_weights().iter().copied().max().unwrap_or(0),
        lp_rounds: report.rounds,
        two_hop_merges: before - clusters,
    };
    if (clusters as f64) > (1.0 - params.shrink_convergence_factor) * n as f64 {
        stats.coarse_nodes = n;
        return Ok(CoarsenOutcome::Converged(stats));
    }
    let level = contract(graph, &clustering);
    let (coarse_graph, perm) = rearrange_by_degree_buckets(&level.coarse_graph);
    let coarse_of: Vec<NodeId> = level.coarse_of.iter().map(|&c| perm[c as usize]).collect();
    Ok(CoarsenOutcome::Coarsened(HierarchyLevel { coarse_graph, coarse_of }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::build_graph;

    #[test]
    fn cluster_weight_for_large_graph() {
        let u = max_cluster_weight(1_000_000, 64, 0.03, 1_000_000, 2000);
        assert!((u - 468.75).abs() < 1e-9);
    }

    #[test]
    fn cluster_weight_adapts_on_small_graphs() {
        let u = max_cluster_weight(1_000_000, 64, 0.03, 32_000, 2000);
        assert!((u - 937.5).abs() < 1e-9);
    }

    #[test]
    fn cluster_weight_for_bipartitioning() {
        for n in [10, 5000, 1_000_000] {
            let u = max_cluster_weight(1000, 2, 0.03, n, 2000);
            assert!((u - 15.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_small_graphs() {
        let g = grid(10, 10);
        let params = CoarseningParams {
            contraction_limit: 50,
            ..CoarseningParams::new(4, 0.03)
        };
        assert!(matches!(
            coarsen_level(&g, &params, 0),
            Err(Error::NotCoarsenable { n: 100, limit: 100 })
        ));
    }

    #[test]
    fn grid_shrinks_to_contraction_limit() {
        let (mut g, _) = rearrange_by_degree_buckets(&grid(128, 128));
        let params = CoarseningParams::new(64, 0.03);
        let total = g.total_node_weight();
        let mut levels = 0;
        while g.n() > 2 * params.contraction_limit {
            match coarsen_level(&g, &params, levels).unwrap() {
                CoarsenOutcome::Coarsened(level, stats) => {
                    assert!(level.coarse_graph.n() < g.n());
                    if rayon::current_num_threads() == 1 {
                        assert_eq!(stats.overshoot(), 0);
                    }
                    assert_eq!(level.coarse_graph.total_node_weight(), total);
                    g = level.coarse_graph;
                }
                CoarsenOutcome::Converged(_) => panic!("grid coarsening converged at n = {}", g.n()),
            }
            levels += 1;
        }
        assert!(g.n() <= 4000);
        assert!(g.bucket_offsets().is_some());
    }

    #[test]
    fn isolated_nodes_converge() {
        let g = build_graph(5000, &[], None).unwrap();
        let params = CoarseningParams::new(8, 0.03);
        assert!(matches!(coarsen_level(&g, &params, 3).unwrap(), CoarsenOutcome::Converged(_)));
    }

    #[test]
    fn projected_cut_matches_coarse_cut() {
        use crate::metrics::edge_cut;
        use crate::partition::Partition;
        let (g, _) = rearrange_by_degree_buckets(&grid(80, 80));
        let params = CoarseningParams {
            contraction_limit: 100,
            ..CoarseningParams::new(8, 0.03)
        };
        let CoarsenOutcome::Coarsened(level, _) = coarsen_level(&g, &params, 9).unwrap() else {
            panic!("expected a coarse level");
        };
        let cg = &level.coarse_graph;
        let blocks: Vec<BlockId> = (0..cg.n() as u32).map(|v| v % 3).collect();
        let coarse = Partition::from_blocks(cg, blocks, 3).unwrap();
        let fine = coarse.project(&level.coarse_of);
        assert!(fine.weights_consistent(&g));
        assert_eq!(edge_cut(&g, &fine), edge_cut(cg, &coarse));
    }

    #[test]
    fn params_validation() {
        assert!(CoarseningParams::new(4, 0.03).validate().is_ok());
        let bad = CoarseningParams {
            shrink_convergence_factor: 1.0,
            ..CoarseningParams::new(4, 0.03)
        };
        assert!(bad.validate().is_err());
        let bad = CoarseningParams {
            contraction_limit: 1,
            ..CoarseningParams::new(4, 0.03)
        };
        assert!(bad.validate().is_err());
    }
}
