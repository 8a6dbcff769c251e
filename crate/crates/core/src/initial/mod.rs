//! Sequential multilevel bipartitioning for small graphs.
//!
//! The input is coarsened with label propagation, a pool of flat algorithms
//! (random, BFS, greedy graph growing) each followed by 2-way FM is run on the
//! coarsest graph, and the best candidate is projected back and refined with
//! FM on every level.

mod flat;
mod fm;

pub use flat::{bfs_bipartition, flat_bipartition, greedy_graph_growing, random_bipartition, FlatAlgorithm};
pub use fm::fm2way_refine;

use crate::coarsening::{lp_cluster_sequential, two_hop_merge, TWO_HOP_SHRINK_TARGET};
use crate::graph::{contract_sequential, BlockId, EdgeWeight, Graph, NodeId, NodeWeight};
use crate::metrics::{edge_cut_of_labels, floor_tolerant};
use crate::util::random::{mix_seed, rng_from_seed, Rng};

/// Default number of pool repetitions.
pub const DEFAULT_REPETITIONS: usize = 8;

/// Weight limits and weight ratio of the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideTargets {
    /// Largest admissible weight per side.
    pub max: [NodeWeight; 2],
    /// The two sides should weigh in the ratio `ratio[0] : ratio[1]`.
    pub ratio: [BlockId; 2],
    pub total: NodeWeight,
}

impl SideTargets {
    /// Even split with limit `(1 + eps) * ceil(c(V) / 2)` per side.
    pub fn balanced(total: NodeWeight, epsilon: f64) -> Self {
        Self::with_ratio(total, epsilon, 1, 1)
    }

    /// Split in the ratio `f0 : f1`; side `i` may weigh up to
    /// `(1 + eps) * ceil(c(V) * f_i / (f0 + f1))`.
    pub fn with_ratio(total: NodeWeight, epsilon: f64, f0: BlockId, f1: BlockId) -> Self {
        let f = (f0 + f1) as u128;
        let limit = |fi: BlockId| {
            let share = (total as u128 * fi as u128).div_ceil(f);
            floor_tolerant((1.0 + epsilon) * share as f64)
        };
        Self {
            max: [limit(f0), limit(f1)],
            ratio: [f0, f1],
            total,
        }
    }

    /// Explicit per-side limits.
    pub fn with_limits(total: NodeWeight, max: [NodeWeight; 2], ratio: [BlockId; 2]) -> Self {
        Self { max, ratio, total }
    }

    /// Whether side 0 has reached its share of the total weight.
    pub fn reached_target0(&self, weight0: NodeWeight) -> bool {
        let f = (self.ratio[0] + self.ratio[1]) as u128;
        weight0 as u128 * f >= self.total as u128 * self.ratio[0] as u128
    }

    /// The side that is lighter relative to its share (side 0 on ties).
    pub fn relatively_lighter(&self, weights: [NodeWeight; 2]) -> usize {
        let load0 = weights[0] as u128 * self.ratio[1] as u128;
        let load1 = weights[1] as u128 * self.ratio[0] as u128;
        usize::from(load0 > load1)
    }

    /// Largest excess of a side over its limit.
    pub fn overload(&self, weights: [NodeWeight; 2]) -> NodeWeight {
        weights[0]
            .saturating_sub(self.max[0])
            .max(weights[1].saturating_sub(self.max[1]))
    }

    pub fn overloaded_side(&self, weights: [NodeWeight; 2]) -> Option<usize> {
        (0..2).find(|&s| weights[s] > self.max[s])
    }

    pub fn is_feasible(&self, weights: [NodeWeight; 2]) -> bool {
        weights[0] <= self.max[0] && weights[1] <= self.max[1]
    }
}

/// Two-way partition of a small graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    /// Side (0 or 1) of every node.
    pub sides: Vec<BlockId>,
    pub side_weights: [NodeWeight; 2],
    pub cut: EdgeWeight,
    /// Whether both sides are within their limits.
    pub feasible: bool,
}

impl Bipartition {
    pub fn from_sides(graph: &Graph, sides: Vec<BlockId>, targets: &SideTargets) -> Self {
        let mut side_weights = [0; 2];
        for (v, &s) in sides.iter().enumerate() {
            side_weights[s as usize] += graph.node_weight(v as NodeId);
        }
        let cut = edge_cut_of_labels(graph, &sides);
        Self {
            feasible: targets.is_feasible(side_weights),
            sides,
            side_weights,
            cut,
        }
    }

    /// Selection order: feasible before infeasible; among feasible ones lower
    /// cut; among infeasible ones less overload, then lower cut.
    pub fn is_better_than(&self, other: &Bipartition, targets: &SideTargets) -> bool {
        match (self.feasible, other.feasible) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.cut < other.cut,
            (false, false) => {
                let a = (targets.overload(self.side_weights), self.cut);
                let b = (targets.overload(other.side_weights), other.cut);
                a < b
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartitionParams {
    pub targets: SideTargets,
    /// Total pool runs (at least one per flat algorithm).
    pub repetitions: usize,
    /// Clusters formed while coarsening weigh at most `c(V) / divisor`.
    pub coarsening_divisor: NodeWeight,
    pub lp_rounds: usize,
    /// Coarsening stops once a level shrinks by less than this fraction.
    pub shrink_convergence_factor: f64,
}

impl BipartitionParams {
    pub fn new(targets: SideTargets) -> Self {
        Self {
            targets,
            repetitions: DEFAULT_REPETITIONS,
            coarsening_divisor: 32,
            lp_rounds: 5,
            shrink_convergence_factor: 0.05,
        }
    }
}

/// Running statistics of one flat algorithm in the pool.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgorithmStats {
    pub runs: usize,
    pub total_cut: EdgeWeight,
    pub best_cut: Option<EdgeWeight>,
}

impl AlgorithmStats {
    pub fn mean_cut(&self) -> f64 {
        if self.runs == 0 {
            f64::INFINITY
        } else {
            self.total_cut as f64 / self.runs as f64
        }
    }
}

/// Adaptive allocation of pool runs: every algorithm runs once, the remaining
/// runs go round-robin to the algorithms whose mean cut is within 10% of the
/// best mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolState {
    pub stats: [AlgorithmStats; 3],
    pub budget: usize,
    next: usize,
}

impl PoolState {
    pub fn new(repetitions: usize) -> Self {
        Self {
            stats: [AlgorithmStats::default(); 3],
            budget: repetitions.max(FlatAlgorithm::ALL.len()),
            next: 0,
        }
    }

    pub fn runs(&self) -> usize {
        self.stats.iter().map(|s| s.runs).sum()
    }

    /// The algorithm for the next run, or `None` once the budget is spent.
    pub fn next_algorithm(&mut self) -> Option<FlatAlgorithm> {
        let runs = self.runs();
        if runs >= self.budget {
            return None;
        }
        if runs < FlatAlgorithm::ALL.len() {
            return Some(FlatAlgorithm::ALL[runs]);
        }
        let best = self.stats.iter().map(AlgorithmStats::mean_cut).fold(f64::INFINITY, f64::min);
        for _ in 0..FlatAlgorithm::ALL.len() {
            let i = self.next % FlatAlgorithm::ALL.len();
            self.next += 1;
            if self.stats[i].mean_cut() <= 1.1 * best {
                return Some(FlatAlgorithm::ALL[i]);
            }
        }
        unreachable!("the algorithm with the best mean is always eligible")
    }

    pub fn record(&mut self, algorithm: FlatAlgorithm, cut: EdgeWeight) {
        let i = FlatAlgorithm::ALL.iter().position(|&a| a == algorithm).unwrap();
        let s = &mut self.stats[i];
        s.runs += 1;
        s.total_cut += cut;
        s.best_cut = Some(s.best_cut.map_or(cut, |b| b.min(cut)));
    }
}

/// Multilevel bipartition of `graph` into two sides of (roughly) equal weight
/// with imbalance `epsilon_prime`.
pub fn bipartition(graph: &Graph, epsilon_prime: f64, repetitions: usize, seed: u64) -> Bipartition {
    let mut params = BipartitionParams::new(SideTargets::balanced(graph.total_node_weight(), epsilon_prime));
    params.repetitions = repetitions;
    bipartition_with(graph, &params, seed)
}

struct InternalLevel {
    graph: Graph,
    coarse_of: Vec<NodeId>,
}

/// Multilevel bipartition with explicit targets. Runs on the calling thread
/// only.
pub fn bipartition_with(graph: &Graph, params: &BipartitionParams, seed: u64) -> Bipartition {
    let targets = &params.targets;
    let mut rng = rng_from_seed(seed);
    if graph.n() <= 1 {
        let sides = vec![0; graph.n()];
        return Bipartition::from_sides(graph, sides, targets);
    }

    // coarsen until contraction stalls
    let max_cluster = (graph.total_node_weight() / params.coarsening_divisor.max(1)).max(1);
    let mut levels: Vec<InternalLevel> = Vec::new();
    loop {
        let current = levels.last().map_or(graph, |l| &l.graph);
        let n = current.n();
        if n <= 2 {
            break;
        }
        let clustering = lp_cluster_sequential(current, max_cluster, params.lp_rounds, &mut rng);
        let clustering = two_hop_merge(current, clustering, max_cluster, TWO_HOP_SHRINK_TARGET);
        let clusters = clustering.num_clusters();
        if clusters as f64 > (1.0 - params.shrink_convergence_factor) * n as f64 {
            break;
        }
        let level = contract_sequential(current, &clustering);
        levels.push(InternalLevel {
            graph: level.coarse_graph,
            coarse_of: level.coarse_of,
        });
    }

    let coarsest = levels.last().map_or(graph, |l| &l.graph);
    let mut best = best_of_pool(coarsest, params, &mut rng);

    // uncoarsen
    for i in (0..levels.len()).rev() {
        let finer = if i == 0 { graph } else { &levels[i - 1].graph };
        let sides: Vec<BlockId> = levels[i].coarse_of.iter().map(|&c| best.sides[c as usize]).collect();
        best = Bipartition {
            sides,
            side_weights: best.side_weights,
            cut: best.cut,
            feasible: best.feasible,
        };
        fm2way_refine(finer, &mut best, targets, &mut rng);
    }
    best
}

/// Runs the flat pool on `graph`, refining every candidate with FM, and
/// returns the best candidate.
fn best_of_pool(graph: &Graph, params: &BipartitionParams, rng: &mut Rng) -> Bipartition {
    let targets = &params.targets;
    let mut pool = PoolState::new(params.repetitions);
    let mut best: Option<Bipartition> = None;
    let mut run = 0u64;
    while let Some(algorithm) = pool.next_algorithm() {
        let mut run_rng = rng_from_seed(mix_seed(rand::Rng::random(rng), run));
        run += 1;
        let mut candidate = flat_bipartition(algorithm, graph, targets, &mut run_rng);
        fm2way_refine(graph, &mut candidate, targets, &mut run_rng);
        pool.record(algorithm, candidate.cut);
        if best.as_ref().is_none_or(|b| candidate.is_better_than(b, targets)) {
            best = Some(candidate);
        }
    }
    best.expect("the pool runs at least once")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::build_graph;

    #[test]
    fn two_triangles_split_at_bridge() {
        let g = two_triangles();
        for seed in 0..20 {
            let b = bipartition(&g, 0.03, 8, seed);
            assert_eq!(b.cut, 1);
            assert!(b.feasible);
            assert_eq!(b.sides[0], b.sides[1]);
            assert_eq!(b.sides[1], b.sides[2]);
            assert_ne!(b.sides[2], b.sides[3]);
        }
    }

    #[test]
    fn two_nodes() {
        let g = path(2);
        let b = bipartition(&g, 0.03, 8, 0);
        assert_eq!(b.cut, 1);
        assert_ne!(b.sides[0], b.sides[1]);
        assert!(b.feasible);
    }

    #[test]
    fn sixteen_cycle_contiguous_arcs() {
        let g = cycle(16);
        for seed in 0..20 {
            let b = bipartition(&g, 0.0, 8, seed);
            assert_eq!(b.cut, 2);
            assert_eq!(b.side_weights, [8, 8]);
        }
    }

    #[test]
    fn single_node_is_trivial() {
        let g = build_graph(1, &[], Some(vec![5])).unwrap();
        let b = bipartition(&g, 0.03, 8, 0);
        assert_eq!(b.sides, vec![0]);
        assert_eq!(b.side_weights, [5, 0]);
        assert!(!b.feasible);
    }

    #[test]
    fn larger_grid_is_feasible_and_consistent() {
        let g = grid(60, 60);
        for seed in 0..3 {
            let b = bipartition(&g, 0.03, 8, seed);
            assert!(b.feasible);
            assert_eq!(b.cut, edge_cut_of_labels(&g, &b.sides));
            assert!(b.cut <= 90, "cut {}", b.cut);
        }
    }

    #[test]
    fn ratio_targets() {
        let g = grid(30, 30);
        let targets = SideTargets::with_ratio(900, 0.03, 1, 2);
        assert_eq!(targets.max, [309, 618]);
        let b = bipartition_with(&g, &BipartitionParams::new(targets), 4);
        assert!(b.feasible);
        assert!(b.side_weights[0] >= 250);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = grid(25, 25);
        assert_eq!(bipartition(&g, 0.03, 8, 11), bipartition(&g, 0.03, 8, 11));
    }

    #[test]
    fn pool_allocation() {
        let mut pool = PoolState::new(8);
        let mut order = Vec::new();
        while let Some(a) = pool.next_algorithm() {
            let cut = match a {
                FlatAlgorithm::Random => 100,
                FlatAlgorithm::Bfs => 10,
                FlatAlgorithm::GreedyGraphGrowing => 10,
            };
            pool.record(a, cut);
            order.push(a);
        }
        assert_eq!(order.len(), 8);
        assert_eq!(&order[..3], &FlatAlgorithm::ALL);
        assert!(order[3..].iter().all(|&a| a != FlatAlgorithm::Random));
        assert_eq!(pool.stats[0].runs, 1);
    }

    #[test]
    fn pool_runs_every_algorithm_even_with_small_budget() {
        let mut pool = PoolState::new(1);
        let mut runs = 0;
        while let Some(a) = pool.next_algorithm() {
            pool.record(a, 1);
            runs += 1;
        }
        assert_eq!(runs, 3);
    }

    #[test]
    fn selection_rule() {
        let g = path(4);
        let targets = SideTargets::balanced(4, 0.0);
        let feasible_bad = Bipartition::from_sides(&g, vec![0, 1, 0, 1], &targets);
        let infeasible_good = Bipartition::from_sides(&g, vec![0, 0, 0, 1], &targets);
        assert!(feasible_bad.is_better_than(&infeasible_good, &targets));
        let worse_overload = Bipartition::from_sides(&g, vec![0, 0, 0, 0], &targets);
        assert!(infeasible_good.is_better_than(&worse_overload, &targets));
    }
}
