//! Splitting blocks by recursive bipartitioning.

use rayon::prelude::*;

use crate::graph::{extract_blocks, BlockId, Graph, NodeWeight};
use crate::initial::{bipartition_with, BipartitionParams, SideTargets};
use crate::partition::Partition;
use crate::util::random::mix_seed;

/// Number of blocks a level with `n` nodes carries: the smallest power of two
/// that is at least `n / C`, clamped to `[2, k]`. The input graph always
/// carries `k` blocks.
pub fn target_block_count(n: usize, contraction_limit: usize, k: BlockId, is_finest: bool) -> BlockId {
    if is_finest {
        return k;
    }
    let ratio = n.div_ceil(contraction_limit.max(1)).max(1);
    let pow2 = ratio.checked_next_power_of_two().unwrap_or(usize::MAX);
    pow2.clamp(2, k.max(2) as usize) as BlockId
}

/// Imbalance for one bipartition on the way from `parts` blocks to `k`:
/// `((1 + eps) c(V) / (parts c(V_i)))^(1 / log2(k / parts)) - 1`, where `c(V)`
/// is the weight of the original input and `c(V_i)` that of the block being
/// split.
pub fn adaptive_epsilon(total_weight: NodeWeight, parts: BlockId, block_weight: NodeWeight, k: BlockId, epsilon: f64) -> f64 {
    let base = (1.0 + epsilon) * total_weight as f64 / (parts as f64 * block_weight as f64);
    let exponent = 1.0 / (k as f64 / parts as f64).log2();
    base.powf(exponent) - 1.0
}

/// [`adaptive_epsilon`] for a block that still has to be divided into
/// `final_count` blocks: `parts / k` becomes `final_count / k` and the
/// exponent uses the number of remaining bisection levels,
/// `ceil(log2(final_count))`.
pub fn adaptive_epsilon_for_block(
    total_weight: NodeWeight,
    final_count: BlockId,
    block_weight: NodeWeight,
    k: BlockId,
    epsilon: f64,
) -> f64 {
    debug_assert!(final_count >= 2);
    let base = (1.0 + epsilon) * total_weight as f64 * final_count as f64 / (k as f64 * block_weight.max(1) as f64);
    let levels = final_count.next_power_of_two().trailing_zeros();
    base.powf(1.0 / levels as f64) - 1.0
}

/// Settings shared by all bipartitions of one [`bipartition_blocks`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    /// Weight of the original input graph.
    pub total_weight: NodeWeight,
    pub k: BlockId,
    pub epsilon: f64,
    pub repetitions: usize,
}

/// Bipartitions every block whose final count is at least 2, in parallel.
///
/// A block with final count `f` is split in the ratio `floor(f/2) : ceil(f/2)`
/// (weights and final counts alike) with an adaptive imbalance. Blocks keep
/// their relative order; the two halves of block `b` get consecutive ids. A
/// block that cannot be split (a single node) yields an empty half.
pub fn bipartition_blocks(graph: &Graph, partition: &Partition, params: &SplitParams, seed: u64) -> Partition {
    let k = partition.k();
    let splittable: Vec<BlockId> = (0..k as BlockId).filter(|&b| partition.final_count(b) >= 2).collect();
    if splittable.is_empty() {
        return partition.clone();
    }
    let subgraphs = extract_blocks(graph, partition, &splittable);
    let sides: Vec<Vec<BlockId>> = subgraphs
        .par_iter()
        .map(|sub| {
            let f = partition.final_count(sub.block);
            let (f0, f1) = (f / 2, f - f / 2);
            let block_weight = sub.graph.total_node_weight();
            let eps = adaptive_epsilon_for_block(params.total_weight, f, block_weight, params.k, params.epsilon);
            let mut bp = BipartitionParams::new(SideTargets::with_ratio(block_weight, eps, f0, f1));
            bp.repetitions = params.repetitions;
            bipartition_with(&sub.graph, &bp, mix_seed(seed, sub.block as u64)).sides
        })
        .collect();

    // new ids: halves of a split block are consecutive
    let mut first_id = Vec::with_capacity(k);
    let mut final_counts = Vec::with_capacity(k + splittable.len());
    for b in 0..k as BlockId {
        first_id.push(final_counts.len() as BlockId);
        let f = partition.final_count(b);
        if f >= 2 {
            final_counts.push(f / 2);
            final_counts.push(f - f / 2);
        } else {
            final_counts.push(f);
        }
    }
    let mut block_of: Vec<BlockId> = partition.blocks().par_iter().map(|&b| first_id[b as usize]).collect();
    for (sub, sides) in subgraphs.iter().zip(&sides) {
        for (&v, &side) in sub.nodes.iter().zip(sides) {
            block_of[v as usize] += side;
        }
    }
    Partition::with_final_counts(graph, block_of, final_counts).expect("relabeling keeps ids in range")
}
