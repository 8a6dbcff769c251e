//! Partition quality: edge cut, imbalance and balance-constraint checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{BlockId, EdgeWeight, Graph, NodeWeight};
use crate::partition::Partition;

/// Total weight of edges whose endpoints lie in different blocks; every
/// undirected edge is counted once.
pub fn edge_cut(graph: &Graph, partition: &Partition) -> EdgeWeight {
    edge_cut_of_labels(graph, partition.blocks())
}

/// [`edge_cut`] on raw block labels.
pub fn edge_cut_of_labels(graph: &Graph, block_of: &[BlockId]) -> EdgeWeight {
    let twice: EdgeWeight = graph
        .nodes()
        .into_par_iter()
        .map(|u| {
            let bu = block_of[u as usize];
            graph
                .neighbors(u)
                .filter(|&(v, _)| block_of[v as usize] != bu)
                .map(|(_, w)| w)
                .sum::<EdgeWeight>()
        })
        .sum();
    twice / 2
}

/// Largest block weight relative to the perfectly balanced weight
/// `c(V) / k`, where `k` is the partition's target block count.
pub fn imbalance(graph: &Graph, partition: &Partition) -> f64 {
    let total = graph.total_node_weight();
    if total == 0 {
        return 0.0;
    }
    partition.max_block_weight() as f64 * partition.target_k() as f64 / total as f64
}

/// Which balance constraint to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceMode {
    /// `L_k = (1 + eps) * ceil(c(V) / k)`.
    Lk,
    /// `L_max,k = max{(1 + eps) c(V) / k, c(V) / k + max_v c(v)}`.
    LmaxK,
}

impl std::str::FromStr for BalanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lk" => Ok(BalanceMode::Lk),
            "lmaxk" | "lmax" => Ok(BalanceMode::LmaxK),
            other => Err(format!("unknown balance mode '{other}' (expected Lk or Lmaxk)")),
        }
    }
}

impl std::fmt::Display for BalanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BalanceMode::Lk => "Lk",
            BalanceMode::LmaxK => "Lmaxk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport {
    pub feasible: bool,
    pub max_block_weight: NodeWeight,
    /// Weight limit of a block that stands for a single final block.
    pub limit: f64,
}

/// `L_k` for a single final block.
pub fn l_k(total_weight: NodeWeight, k: BlockId, epsilon: f64) -> f64 {
    (1.0 + epsilon) * total_weight.div_ceil(k as NodeWeight) as f64
}

/// `L_max,k` for a single final block.
pub fn l_max_k(total_weight: NodeWeight, k: BlockId, epsilon: f64, max_node_weight: NodeWeight) -> f64 {
    let avg = total_weight as f64 / k as f64;
    ((1.0 + epsilon) * avg).max(avg + max_node_weight as f64)
}

/// Checks every block against the chosen constraint. A block with final count
/// `f` may weigh up to `f` times the single-block limit. `max_v c(v)` is taken
/// from `graph`.
pub fn check_balance(graph: &Graph, partition: &Partition, epsilon: f64, mode: BalanceMode) -> BalanceReport {
    let total = graph.total_node_weight();
    let k = partition.target_k();
    let limit = match mode {
        BalanceMode::Lk => l_k(total, k, epsilon),
        BalanceMode::LmaxK => l_max_k(total, k, epsilon, graph.max_node_weight()),
    };
    let feasible = partition
        .block_weights()
        .iter()
        .zip(partition.final_counts())
        .all(|(&w, &f)| w <= scaled_limit(total, k, epsilon, graph.max_node_weight(), f, mode));
    BalanceReport {
        feasible,
        max_block_weight: partition.max_block_weight(),
        limit,
    }
}

/// Integer weight limit of a block with final count `f` under `mode`.
fn scaled_limit(
    total: NodeWeight,
    k: BlockId,
    epsilon: f64,
    max_node_weight: NodeWeight,
    f: BlockId,
    mode: BalanceMode,
) -> NodeWeight {
    let f = f as u128;
    let k128 = k as u128;
    let total128 = total as u128;
    match mode {
        BalanceMode::Lk => floor_tolerant((1.0 + epsilon) * (f * total128.div_ceil(k128)) as f64),
        BalanceMode::LmaxK => {
            let relaxed = floor_tolerant((1.0 + epsilon) * (f * total128) as f64 / k as f64);
            // f * (c(V)/k + max c), exact
            let additive = (f * total128 + f * max_node_weight as u128 * k128) / k128;
            relaxed.max(additive as NodeWeight)
        }
    }
}

/// Per-block weight limits enforced by the balancer and the refinement.
///
/// A block with final count `f` gets the tighter of two bounds, each of which
/// on its own guarantees that any node no heavier than `max_node_weight` can be
/// placed in some block:
///
/// - `max{(1+eps) f c(V)/k, f c(V)/k + max_v c(v)}` (the `L_max,k` bound),
/// - `max{(1+eps) f ceil(c(V)/k), f ceil(c(V)/k) + max_v c(v) - 1}`.
///
/// On unit-weight graphs the second bound equals `f L_k`, so a partition within
/// these limits satisfies both `L_k` and `L_max,k`.
pub fn block_weight_limits(
    total_weight: NodeWeight,
    max_node_weight: NodeWeight,
    final_counts: &[BlockId],
    target_k: BlockId,
    epsilon: f64,
) -> Vec<NodeWeight> {
    let k = target_k as u128;
    let total = total_weight as u128;
    let ceil_avg = total.div_ceil(k);
    let max_node = max_node_weight as u128;
    final_counts
        .iter()
        .map(|&f| {
            let f = f as u128;
            let lmax = floor_tolerant((1.0 + epsilon) * (f * total) as f64 / k as f64)
                .max(((f * total + f * max_node * k) / k) as NodeWeight);
            let lk = floor_tolerant((1.0 + epsilon) * (f * ceil_avg) as f64)
                .max((f * ceil_avg + max_node).saturating_sub(1) as NodeWeight);
            lmax.min(lk)
        })
        .collect()
}

/// Limits for `partition` on `graph` (see [`block_weight_limits`]).
pub fn limits_for(graph: &Graph, partition: &Partition, epsilon: f64) -> Vec<NodeWeight> {
    block_weight_limits(
        graph.total_node_weight(),
        graph.max_node_weight(),
        partition.final_counts(),
        partition.target_k(),
        epsilon,
    )
}

/// Whether every block is within its limit.
pub fn within_limits(partition: &Partition, limits: &[NodeWeight]) -> bool {
    partition
        .block_weights()
        .iter()
        .zip(limits)
        .all(|(w, l)| w <= l)
}

/// Floors a product that is mathematically rational, snapping values within
/// floating-point noise of an integer onto that integer.
pub(crate) fn floor_tolerant(x: f64) -> NodeWeight {
    if x <= 0.0 {
        return 0;
    }
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as NodeWeight
    } else {
        x.floor() as NodeWeight
    }
}
