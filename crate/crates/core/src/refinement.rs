//! Size-constrained label propagation refinement of a k-way partition.

use std::cell::RefCell;
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, AtomicUsize, Ordering};

use rand::Rng as _;
use rayon::prelude::*;
use thread_local::ThreadLocal;

use crate::graph::{BlockId, EdgeWeight, Graph, NodeWeight};
use crate::metrics::edge_cut_of_labels;
use crate::partition::Partition;
use crate::util::order::{ChunkedOrder, DEFAULT_CHUNK_SIZE};
use crate::util::random::{mix_seed, rng_from_seed};
use crate::util::rating::{DenseRatingMap, RatingMap};

pub const DEFAULT_REFINEMENT_ROUNDS: usize = 5;

const TIE_BREAK_SALT: u64 = 0x7265_6669;

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementParams {
    /// Maximum weight of each block.
    pub limits: Vec<NodeWeight>,
    pub max_rounds: usize,
    pub chunk_size: usize,
    /// Compute the cut after every round (costs one pass over the edges per
    /// round).
    pub record_round_cuts: bool,
}

impl RefinementParams {
    pub fn new(limits: Vec<NodeWeight>) -> Self {
        Self {
            limits,
            max_rounds: DEFAULT_REFINEMENT_ROUNDS,
            chunk_size: DEFAULT_CHUNK_SIZE,
            record_round_cuts: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefinementStats {
    pub rounds: usize,
    pub moves: usize,
    pub cut_before: EdgeWeight,
    pub cut_after: EdgeWeight,
    /// Cut after each round, if requested.
    pub round_cuts: Vec<EdgeWeight>,
    /// The refined labeling was worse than the input and was discarded.
    pub reverted: bool,
}

/// Improves the cut by label propagation over blocks.
///
/// A node moves to the adjacent block it is most strongly connected to if that
/// connection strictly exceeds its connection to its own block and the move
/// keeps the target within its limit (checked with a compare-and-swap on the
/// block weight, so limits hold under concurrency). Zero-gain moves are never
/// made. Nodes are revisited only after a neighbor moved. Concurrent moves
/// can interact badly, so the cut is recomputed at the end and the input is
/// kept if it was better.
pub fn lp_refine(graph: &Graph, partition: &mut Partition, params: &RefinementParams, seed: u64) -> RefinementStats {
    let k = partition.k();
    assert_eq!(params.limits.len(), k, "one limit per block");
    let n = graph.n();
    let mut stats = RefinementStats {
        cut_before: edge_cut_of_labels(graph, partition.blocks()),
        ..Default::default()
    };
    stats.cut_after = stats.cut_before;
    if k < 2 || n == 0 {
        return stats;
    }

    let labels: Vec<AtomicU32> = partition.blocks().par_iter().map(|&b| AtomicU32::new(b)).collect();
    let weights: Vec<AtomicU64> = partition.block_weights().iter().map(|&w| AtomicU64::new(w)).collect();
    let active: Vec<AtomicBool> = (0..n).into_par_iter().map(|_| AtomicBool::new(true)).collect();
    let order = ChunkedOrder::new(graph, params.chunk_size);
    let maps: ThreadLocal<RefCell<DenseRatingMap>> = ThreadLocal::new();
    let limits = &params.limits;

    for round in 0..params.max_rounds {
        stats.rounds += 1;
        let moved = AtomicUsize::new(0);
        for bucket in order.round(mix_seed(seed, round as u64)) {
            bucket.par_iter().for_each(|chunk| {
                let mut map = maps.get_or(|| RefCell::new(DenseRatingMap::new(k))).borrow_mut();
                map.ensure_key_space(k);
                let mut rng = rng_from_seed(mix_seed(chunk.seed, TIE_BREAK_SALT));
                let mut local_moves = 0;
                for v in chunk.shuffled_nodes() {
                    if !active[v as usize].swap(false, Ordering::Relaxed) {
                        continue;
                    }
                    let own = labels[v as usize].load(Ordering::Relaxed);
                    for (u, w) in graph.neighbors(v) {
                        map.add(labels[u as usize].load(Ordering::Relaxed), w);
                    }
                    let own_conn = map.get(own);
                    let c = graph.node_weight(v);
                    let mut best: Option<(EdgeWeight, BlockId)> = None;
                    let mut ties = 0u32;
                    map.for_each(|b, conn| {
                        if b == own || conn <= own_conn {
                            return;
                        }
                        if weights[b as usize].load(Ordering::Relaxed) + c > limits[b as usize] {
                            return;
                        }
                        match best {
                            Some((bc, _)) if conn < bc => {}
                            Some((bc, _)) if conn == bc => {
                                ties += 1;
                                if rng.random_range(0..ties) == 0 {
                                    best = Some((conn, b));
                                }
                            }
                            _ => {
                                best = Some((conn, b));
                                ties = 1;
                            }
                        }
                    });
                    map.clear();
                    let Some((_, target)) = best else {
                        continue;
                    };
                    if !try_add(&weights[target as usize], c, limits[target as usize]) {
                        continue;
                    }
                    weights[own as usize].fetch_sub(c, Ordering::Relaxed);
                    labels[v as usize].store(target, Ordering::Relaxed);
                    for &u in graph.adjacent_nodes(v) {
                        active[u as usize].store(true, Ordering::Relaxed);
                    }
                    local_moves += 1;
                }
                moved.fetch_add(local_moves, Ordering::Relaxed);
            });
        }
        let moved = moved.into_inner();
        stats.moves += moved;
        if params.record_round_cuts {
            let snapshot: Vec<BlockId> = labels.par_iter().map(|l| l.load(Ordering::Relaxed)).collect();
            stats.round_cuts.push(edge_cut_of_labels(graph, &snapshot));
        }
        if moved == 0 {
            break;
        }
    }

    let refined: Vec<BlockId> = labels.into_par_iter().map(AtomicU32::into_inner).collect();
    let cut = edge_cut_of_labels(graph, &refined);
    if cut > stats.cut_before {
        stats.reverted = true;
        return stats;
    }
    stats.cut_after = cut;
    let weights: Vec<NodeWeight> = weights.into_iter().map(AtomicU64::into_inner).collect();
    *partition = Partition::from_raw(refined, weights, partition.final_counts().to_vec());
    stats
}

/// Adds `w` to `slot` unless the result would exceed `limit`.
fn try_add(slot: &AtomicU64, w: NodeWeight, limit: NodeWeight) -> bool {
    slot.fetch_update(Ordering::AcqRel, Ordering::Acquire, |cur| (cur + w <= limit).then_some(cur + w))
        .is_ok()
}
