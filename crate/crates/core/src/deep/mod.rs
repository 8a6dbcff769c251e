//! Deep multilevel partitioning: a single coarsening cycle, with blocks split
//! by bipartitioning during uncoarsening so that every level carries a number
//! of blocks proportional to its size.

mod split;

use std::time::{Duration, Instant};

pub use split::{adaptive_epsilon, adaptive_epsilon_for_block, bipartition_blocks, target_block_count, SplitParams};

use crate::balancer::balance;
use crate::coarsening::{coarsen_level, CoarseningParams, CoarsenOutcome, DEFAULT_CONTRACTION_LIMIT};
use crate::error::{Error, Result};
use crate::graph::{rearrange_by_degree_buckets, BlockId, EdgeWeight, Graph, HierarchyLevel, NodeWeight};
use crate::initial::DEFAULT_REPETITIONS;
use crate::metrics::{edge_cut, limits_for, within_limits};
use crate::partition::Partition;
use crate::refinement::{lp_refine, RefinementParams, DEFAULT_REFINEMENT_ROUNDS};
use crate::util::random::mix_seed;

const COARSEN_SALT: u64 = 0x636f_6172;
const SPLIT_SALT: u64 = 0x7370_6c69;
const BALANCE_SALT: u64 = 0x6261_6c61;
const REFINE_SALT: u64 = 0x7265_666e;

#[derive(Debug, Clone, PartialEq)]
pub struct DeepParams {
    pub k: BlockId,
    pub epsilon: f64,
    /// Contraction limit `C`: coarsening stops at `2C` nodes.
    pub contraction_limit: usize,
    pub threads: usize,
    pub seed: u64,
    /// Flat bipartitioning runs per bipartition.
    pub repetitions: usize,
    pub refinement_rounds: usize,
}

impl DeepParams {
    pub fn new(k: BlockId, epsilon: f64) -> Self {
        Self {
            k,
            epsilon,
            contraction_limit: DEFAULT_CONTRACTION_LIMIT,
            threads: 1,
            seed: 0,
            repetitions: DEFAULT_REPETITIONS,
            refinement_rounds: DEFAULT_REFINEMENT_ROUNDS,
        }
    }

    pub fn validate(&self, graph: &Graph) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidBlockCount(self.k));
        }
        if self.k as usize > graph.n() {
            return Err(Error::MoreBlocksThanNodes {
                n: graph.n(),
                k: self.k,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if self.contraction_limit < 2 {
            return Err(Error::InvalidParameter("contraction limit must be at least 2".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidParameter("thread count must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Wall time spent per phase. Where the hierarchy is replicated, the times of
/// the slower branch are reported, so the phases never add up to more than the
/// total.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub coarsening: Duration,
    pub initial_partitioning: Duration,
    pub balancing: Duration,
    pub refinement: Duration,
}

impl PhaseTimes {
    pub fn sum(&self) -> Duration {
        self.coarsening + self.initial_partitioning + self.balancing + self.refinement
    }

    fn add(&mut self, other: &PhaseTimes) {
        self.coarsening += other.coarsening;
        self.initial_partitioning += other.initial_partitioning;
        self.balancing += other.balancing;
        self.refinement += other.refinement;
    }
}

/// State of the partition of one level after its blocks were split, balanced
/// and refined.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub nodes: usize,
    /// Block count the level must carry.
    pub target_blocks: BlockId,
    /// Block count after splitting.
    pub blocks: BlockId,
    /// All blocks within their limits after balancing.
    pub balanced: bool,
    pub balance_moves: usize,
    pub cut: EdgeWeight,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeepStats {
    /// Levels from the coarsest to the input graph, of the branch whose
    /// partition was kept.
    pub levels: Vec<LevelReport>,
    pub times: PhaseTimes,
    pub total_time: Duration,
    pub coarsest_nodes: usize,
    /// Number of independent coarsest-level partitions computed.
    pub replicas: usize,
}

/// Partitions `graph` into `params.k` blocks.
pub fn partition_deep(graph: &Graph, params: &DeepParams) -> Result<Partition> {
    partition_deep_with_stats(graph, params).map(|(p, _)| p)
}

/// [`partition_deep`] plus per-level reports and phase times.
pub fn partition_deep_with_stats(graph: &Graph, params: &DeepParams) -> Result<(Partition, DeepStats)> {
    params.validate(graph)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let ctx = Context {
        params,
        total_weight: graph.total_node_weight(),
        coarsening: {
            let mut c = CoarseningParams::new(params.k, params.epsilon);
            c.contraction_limit = params.contraction_limit;
            c
        },
    };
    let (rearranged, new_id) = pool.install(|| rearrange_by_degree_buckets(graph));
    let (partition, mut stats) = pool.install(|| ctx.partition_level(&rearranged, true, params.threads, params.seed))?;
    let block_of: Vec<BlockId> = new_id.iter().map(|&v| partition.block_of(v)).collect();
    let result = Partition::from_blocks(graph, block_of, params.k)?;
    stats.total_time = start.elapsed();
    Ok((result, stats))
}

struct Context<'a> {
    params: &'a DeepParams,
    total_weight: NodeWeight,
    coarsening: CoarseningParams,
}

/// Outcome of one branch: a partition of the branch's input graph.
struct Branch {
    partition: Partition,
    stats: DeepStats,
}

impl Context<'_> {
    /// Coarsens `graph` down to the contraction limit, partitions the coarsest
    /// graph and uncoarsens back to `graph`. With `threads >= 2`, once a level
    /// has at most `threads * C` nodes, the rest of the hierarchy is built
    /// twice by two halves of the thread group and the better result is used.
    fn partition_level(&self, graph: &Graph, is_input: bool, threads: usize, seed: u64) -> Result<(Partition, DeepStats)> {
        let c = self.params.contraction_limit;
        let mut stats = DeepStats::default();
        let mut levels: Vec<HierarchyLevel> = Vec::new();
        let mut replicated: Option<Partition> = None;

        loop {
            let current = levels.last().map_or(graph, |l| &l.coarse_graph);
            let current_is_input = is_input && levels.is_empty();
            if threads >= 2 && current.n() <= threads * c {
                let winner = self.replicate(current, current_is_input, threads, mix_seed(seed, levels.len() as u64))?;
                stats.times.add(&winner.stats.times);
                stats.replicas += winner.stats.replicas;
                stats.coarsest_nodes = winner.stats.coarsest_nodes;
                stats.levels.extend(winner.stats.levels);
                replicated = Some(winner.partition);
                break;
            }
            if current.n() <= 2 * c {
                break;
            }
            let timer = Instant::now();
            let outcome = coarsen_level(current, &self.coarsening, mix_seed(mix_seed(seed, COARSEN_SALT), levels.len() as u64))?;
            stats.times.coarsening += timer.elapsed();
            match outcome {
                CoarsenOutcome::Coarsened(level, _) => levels.push(level),
                CoarsenOutcome::Converged(_) => break,
            }
        }

        let mut partition = match replicated {
            Some(p) => p,
            None => {
                let coarsest = levels.last().map_or(graph, |l| &l.coarse_graph);
                stats.coarsest_nodes = coarsest.n();
                stats.replicas = 1;
                let initial = Partition::single_block(coarsest, self.params.k);
                let is_finest = is_input && levels.is_empty();
                self.process_level(coarsest, initial, is_finest, levels.len(), seed, &mut stats)
            }
        };

        for i in (0..levels.len()).rev() {
            let finer = if i == 0 { graph } else { &levels[i - 1].coarse_graph };
            partition = partition.project(&levels[i].coarse_of);
            partition = self.process_level(finer, partition, is_input && i == 0, i, seed, &mut stats);
        }
        Ok((partition, stats))
    }

    /// Runs [`Context::partition_level`] twice on `graph` with diversified
    /// seeds, each in its own thread pool with half of the threads, and keeps
    /// the better partition.
    fn replicate(&self, graph: &Graph, is_input: bool, threads: usize, seed: u64) -> Result<Branch> {
        let sizes = [threads / 2, threads - threads / 2];
        let run = |branch: usize| -> Result<Branch> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(sizes[branch])
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            let (partition, stats) =
                pool.install(|| self.partition_level(graph, is_input, sizes[branch], mix_seed(seed, branch as u64 + 1)))?;
            Ok(Branch { partition, stats })
        };
        let (left, right) = std::thread::scope(|s| {
            let left = s.spawn(|| run(0));
            let right = run(1);
            (left.join().expect("replication branch panicked"), right)
        });
        let (left, right) = (left?, right?);
        let key = |b: &Branch| {
            let limits = limits_for(graph, &b.partition, self.params.epsilon);
            (
                !within_limits(&b.partition, &limits),
                edge_cut(graph, &b.partition),
                b.partition.max_block_weight(),
            )
        };
        let (mut winner, loser) = if key(&right) < key(&left) { (right, left) } else { (left, right) };
        if loser.stats.times.sum() > winner.stats.times.sum() {
            winner.stats.times = loser.stats.times;
        }
        winner.stats.replicas += loser.stats.replicas;
        Ok(winner)
    }

    /// Splits blocks until the level carries its target block count, then
    /// balances (if needed) and refines.
    fn process_level(
        &self,
        graph: &Graph,
        mut partition: Partition,
        is_finest: bool,
        level: usize,
        seed: u64,
        stats: &mut DeepStats,
    ) -> Partition {
        let params = self.params;
        let seed = mix_seed(seed, 0x100 + level as u64);
        let target = target_block_count(graph.n(), params.contraction_limit, params.k, is_finest);
        let split = SplitParams {
            total_weight: self.total_weight,
            k: params.k,
            epsilon: params.epsilon,
            repetitions: params.repetitions,
        };
        let timer = Instant::now();
        let mut round = 0;
        while (partition.k() as BlockId) < target && partition.final_counts().iter().any(|&f| f >= 2) {
            partition = bipartition_blocks(graph, &partition, &split, mix_seed(mix_seed(seed, SPLIT_SALT), round));
            round += 1;
        }
        stats.times.initial_partitioning += timer.elapsed();

        let limits = limits_for(graph, &partition, params.epsilon);
        let timer = Instant::now();
        let mut balance_moves = 0;
        if !within_limits(&partition, &limits) {
            balance_moves = balance(graph, &mut partition, &limits, mix_seed(seed, BALANCE_SALT)).moves;
        }
        let balanced = within_limits(&partition, &limits);
        stats.times.balancing += timer.elapsed();

        let timer = Instant::now();
        let mut refinement = RefinementParams::new(limits);
        refinement.max_rounds = params.refinement_rounds;
        let refined = lp_refine(graph, &mut partition, &refinement, mix_seed(seed, REFINE_SALT));
        stats.times.refinement += timer.elapsed();

        stats.levels.push(LevelReport {
            nodes: graph.n(),
            target_blocks: target,
            blocks: partition.k() as BlockId,
            balanced,
            balance_moves,
            cut: refined.cut_after,
        });
        partition
    }
}
