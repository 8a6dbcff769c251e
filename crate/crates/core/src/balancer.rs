//! Greedy rebalancing: empties overloaded blocks by moving the nodes with the
//! highest relative gain into blocks that can take them.

use std::cmp::Ordering as CmpOrdering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::Rng as _;
use rayon::prelude::*;

use crate::graph::{BlockId, Graph, NodeId, NodeWeight};
use crate::partition::Partition;
use crate::util::heap::IndexedMaxHeap;
use crate::util::random::{mix_seed, rng_from_seed, Rng};
use crate::util::rating::{DenseRatingMap, RatingMap};

/// Stale entries are refreshed at most this many times before the node is
/// moved with whatever its current target is.
const MAX_REFRESHES: u8 = 4;

/// Priority of a node in the balancer queues.
///
/// With `d` the largest cut reduction achievable by moving `v` into a block
/// that can take it, the relative gain is `d * c(v)` for `d >= 0` and
/// `d / c(v)` otherwise, so heavy nodes are preferred in both cases.
pub fn relative_gain_value(d: i64, weight: NodeWeight) -> f64 {
    if d >= 0 {
        d as f64 * weight as f64
    } else {
        d as f64 / weight as f64
    }
}

/// Relative gain of moving `v` out of its block, and the block achieving it.
///
/// Only blocks other than `v`'s own block that are within their limit and stay
/// within it after receiving `v` are candidates. Returns
/// `(f64::NEG_INFINITY, None)` if no block can take `v`.
pub fn relative_gain(graph: &Graph, partition: &Partition, v: NodeId, limits: &[NodeWeight]) -> (f64, Option<BlockId>) {
    let weights = partition.block_weights();
    let roomiest = roomiest_block(weights, limits, partition.block_of(v));
    let mut map = DenseRatingMap::new(partition.k());
    gain_and_target(
        graph,
        v,
        |u| partition.block_of(u),
        |b| weights[b as usize],
        limits,
        roomiest,
        &mut map,
    )
}

/// Block other than `exclude` with the most remaining capacity
/// (`limit - weight`), if any such block is within its limit.
fn roomiest_block(weights: &[NodeWeight], limits: &[NodeWeight], exclude: BlockId) -> Option<BlockId> {
    (0..weights.len())
        .filter(|&b| b != exclude as usize && weights[b] <= limits[b])
        .max_by_key(|&b| (limits[b] - weights[b], std::cmp::Reverse(b)))
        .map(|b| b as BlockId)
}

/// Core of [`relative_gain`]. `roomiest` must be the block other than `v`'s
/// own with the most remaining capacity (in the balancer `v`'s block is
/// overloaded, so the overall roomiest block qualifies): a block that is not adjacent to `v` only matters if no
/// adjacent block can take `v`, and then the roomiest block can take `v` iff
/// any block can.
fn gain_and_target(
    graph: &Graph,
    v: NodeId,
    block_of: impl Fn(NodeId) -> BlockId,
    weight_of: impl Fn(BlockId) -> NodeWeight,
    limits: &[NodeWeight],
    roomiest: Option<BlockId>,
    map: &mut DenseRatingMap,
) -> (f64, Option<BlockId>) {
    let own = block_of(v);
    let c = graph.node_weight(v);
    for (u, w) in graph.neighbors(v) {
        map.add(block_of(u), w);
    }
    let own_conn = map.get(own) as i64;
    let fits = |b: BlockId| {
        let w = weight_of(b);
        w <= limits[b as usize] && w + c <= limits[b as usize]
    };
    let mut best: Option<(i64, BlockId)> = None;
    map.for_each(|b, conn| {
        if b == own || !fits(b) {
            return;
        }
        let d = conn as i64 - own_conn;
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, b));
        }
    });
    if best.is_none() {
        if let Some(r) = roomiest {
            if r != own && map.get(r) == 0 && fits(r) {
                best = Some((-own_conn, r));
            }
        }
    }
    map.clear();
    match best {
        Some((d, b)) => (relative_gain_value(d, c), Some(b)),
        None => (f64::NEG_INFINITY, None),
    }
}

/// Outcome of [`balance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BalanceStats {
    pub overloaded_before: usize,
    pub overloaded_after: usize,
    pub moves: usize,
}

impl BalanceStats {
    pub fn feasible(&self) -> bool {
        self.overloaded_after == 0
    }
}

/// Float key ordered by `total_cmp`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Gain(f64);

impl Eq for Gain {}

impl PartialOrd for Gain {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gain {
    fn cmp(&self, other: &Self) -> CmpOrdering {
        self.0.total_cmp(&other.0)
    }
}

/// Priority queue of one overloaded block, ordered by relative gain.
struct BlockQueue {
    entries: BTreeSet<(Gain, NodeId)>,
    weight: NodeWeight,
}

impl BlockQueue {
    fn new() -> Self {
        Self {
            entries: BTreeSet::new(),
            weight: 0,
        }
    }

    fn insert(&mut self, graph: &Graph, v: NodeId, gain: f64) {
        if self.entries.insert((Gain(gain), v)) {
            self.weight += graph.node_weight(v);
        }
    }

    fn min_gain(&self) -> Option<f64> {
        self.entries.first().map(|(g, _)| g.0)
    }

    fn pop_min(&mut self, graph: &Graph) -> Option<NodeId> {
        let (_, v) = self.entries.pop_first()?;
        self.weight -= graph.node_weight(v);
        Some(v)
    }

    fn pop_max(&mut self, graph: &Graph) -> Option<(f64, NodeId)> {
        let (g, v) = self.entries.pop_last()?;
        self.weight -= graph.node_weight(v);
        Some((g.0, v))
    }

    /// Insertion rule used while building the queue: take the node while the
    /// queue holds less than the overload, afterwards only if it beats the
    /// current minimum; then drop minima while the queue holds more than
    /// `overload + max_node_weight`.
    fn offer(&mut self, graph: &Graph, v: NodeId, gain: f64, overload: NodeWeight) {
        if self.weight < overload || self.min_gain().is_some_and(|m| gain > m) {
            self.insert(graph, v, gain);
            while self.weight > overload + graph.max_node_weight() {
                self.pop_min(graph);
            }
        }
    }
}

/// Remaining capacity of every block, shared between the workers emptying
/// different blocks.
struct Capacity<'a> {
    weights: Vec<AtomicU64>,
    limits: &'a [NodeWeight],
    room: Mutex<IndexedMaxHeap<i64>>,
}

impl<'a> Capacity<'a> {
    fn new(block_weights: &[NodeWeight], limits: &'a [NodeWeight]) -> Self {
        let mut room = IndexedMaxHeap::new(block_weights.len());
        for (b, &w) in block_weights.iter().enumerate() {
            room.push(b as BlockId, limits[b] as i64 - w as i64);
        }
        Self {
            weights: block_weights.iter().map(|&w| AtomicU64::new(w)).collect(),
            limits,
            room: Mutex::new(room),
        }
    }

    fn weight(&self, b: BlockId) -> NodeWeight {
        self.weights[b as usize].load(Ordering::Acquire)
    }

    fn roomiest(&self) -> Option<BlockId> {
        let room = self.room.lock().unwrap();
        room.peek().filter(|&(_, r)| r >= 0).map(|(b, _)| b)
    }

    /// Reserves `w` in block `b` if the block stays within its limit.
    fn try_reserve(&self, b: BlockId, w: NodeWeight) -> bool {
        let slot = &self.weights[b as usize];
        let previous = slot.fetch_add(w, Ordering::AcqRel);
        if previous > self.limits[b as usize] || previous + w > self.limits[b as usize] {
            slot.fetch_sub(w, Ordering::AcqRel);
            return false;
        }
        self.sync_room(b);
        true
    }

    fn release(&self, b: BlockId, w: NodeWeight) {
        self.weights[b as usize].fetch_sub(w, Ordering::AcqRel);
        self.sync_room(b);
    }

    fn sync_room(&self, b: BlockId) {
        let mut room = self.room.lock().unwrap();
        let w = self.weights[b as usize].load(Ordering::Acquire);
        room.set(b, self.limits[b as usize] as i64 - w as i64);
    }

    /// A uniformly random block that can take `w`, other than `own`.
    fn random_admissible(&self, own: BlockId, w: NodeWeight, rng: &mut Rng) -> Option<BlockId> {
        let k = self.limits.len() as BlockId;
        let fits = |b: BlockId| b != own && {
            let cur = self.weight(b);
            cur <= self.limits[b as usize] && cur + w <= self.limits[b as usize]
        };
        for _ in 0..8 {
            let b = rng.random_range(0..k);
            if fits(b) {
                return Some(b);
            }
        }
        let admissible: Vec<BlockId> = (0..k).filter(|&b| fits(b)).collect();
        if admissible.is_empty() {
            None
        } else {
            Some(admissible[rng.random_range(0..admissible.len())])
        }
    }
}

/// Moves nodes out of every block heavier than its limit until all blocks
/// are within their limits or no node of an overloaded block fits anywhere.
///
/// Every overloaded block is emptied by one worker; moves into other blocks
/// reserve weight atomically and are rolled back if the limit would be
/// exceeded. Each node moves at most once.
pub fn balance(graph: &Graph, partition: &mut Partition, limits: &[NodeWeight], seed: u64) -> BalanceStats {
    let k = partition.k();
    assert_eq!(limits.len(), k, "one limit per block");
    let overloaded: Vec<BlockId> = (0..k as BlockId)
        .filter(|&b| partition.block_weight(b) > limits[b as usize])
        .collect();
    let mut stats = BalanceStats {
        overloaded_before: overloaded.len(),
        ..Default::default()
    };
    if overloaded.is_empty() {
        return stats;
    }

    // nodes of each overloaded block
    let mut slot_of_block = vec![usize::MAX; k];
    for (i, &b) in overloaded.iter().enumerate() {
        slot_of_block[b as usize] = i;
    }
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); overloaded.len()];
    for v in graph.nodes() {
        let slot = slot_of_block[partition.block_of(v) as usize];
        if slot != usize::MAX {
            members[slot].push(v);
        }
    }

    let capacity = Capacity::new(partition.block_weights(), limits);
    let snapshot: &Partition = partition;
    let results: Vec<Vec<(NodeId, BlockId)>> = overloaded
        .par_iter()
        .zip(members.par_iter())
        .map(|(&block, nodes)| empty_block(graph, snapshot, block, nodes, &capacity, mix_seed(seed, block as u64)))
        .collect();

    for moves in results {
        for (v, to) in moves {
            partition.move_node(graph, v, to);
            stats.moves += 1;
        }
    }
    stats.overloaded_after = (0..k as BlockId)
        .filter(|&b| partition.block_weight(b) > limits[b as usize])
        .count();
    stats
}

/// Empties one overloaded block. Returns the applied moves; their weight is
/// already accounted for in `capacity`.
fn empty_block(
    graph: &Graph,
    partition: &Partition,
    block: BlockId,
    nodes: &[NodeId],
    capacity: &Capacity<'_>,
    seed: u64,
) -> Vec<(NodeId, BlockId)> {
    let mut rng = rng_from_seed(seed);
    let limit = capacity.limits[block as usize];
    let mut map = DenseRatingMap::new(partition.k());
    // Nodes leave `block` only through this worker, so a local overlay of
    // moved nodes is an exact view of the block's membership.
    let mut moved: HashMap<NodeId, BlockId> = HashMap::new();
    let mut attempted: HashSet<NodeId> = HashSet::new();
    let mut refreshes: HashMap<NodeId, u8> = HashMap::new();
    let mut moves = Vec::new();

    let fresh = |v: NodeId, moved: &HashMap<NodeId, BlockId>, map: &mut DenseRatingMap| {
        gain_and_target(
            graph,
            v,
            |u| moved.get(&u).copied().unwrap_or_else(|| partition.block_of(u)),
            |b| capacity.weight(b),
            capacity.limits,
            capacity.roomiest(),
            map,
        )
    };

    let mut queue = BlockQueue::new();
    let overload = capacity.weight(block) - limit;
    for &v in nodes {
        attempted.insert(v);
        let (gain, target) = fresh(v, &moved, &mut map);
        if target.is_some() {
            queue.offer(graph, v, gain, overload);
        }
    }
    let mut refilled = false;

    while capacity.weight(block) > limit {
        let Some((cached, v)) = queue.pop_max(graph) else {
            if refilled {
                break;
            }
            // the queue ran dry: give every remaining node another chance
            refilled = true;
            for &v in nodes {
                if moved.contains_key(&v) {
                    continue;
                }
                let (gain, target) = fresh(v, &moved, &mut map);
                if target.is_some() {
                    queue.insert(graph, v, gain);
                }
            }
            continue;
        };
        let (gain, target) = fresh(v, &moved, &mut map);
        let count = refreshes.entry(v).or_insert(0);
        if gain != cached && *count < MAX_REFRESHES {
            *count += 1;
            let border = graph.adjacent_nodes(v).iter().any(|&u| {
                moved.get(&u).copied().unwrap_or_else(|| partition.block_of(u)) != block
            });
            if border && target.is_some() {
                queue.insert(graph, v, gain);
                continue;
            }
        }
        let w = graph.node_weight(v);
        let target = target.or_else(|| capacity.random_admissible(block, w, &mut rng));
        let Some(target) = target else {
            continue;
        };
        if !capacity.try_reserve(target, w) {
            // another worker filled the target in the meantime
            if *refreshes.entry(v).or_insert(0) < MAX_REFRESHES {
                *refreshes.get_mut(&v).unwrap() += 1;
                let (gain, target) = fresh(v, &moved, &mut map);
                if target.is_some() {
                    queue.insert(graph, v, gain);
                }
            }
            continue;
        }
        capacity.release(block, w);
        moved.insert(v, target);
        moves.push((v, target));
        for &u in graph.adjacent_nodes(v) {
            let in_block = !moved.contains_key(&u) && partition.block_of(u) == block;
            if in_block && attempted.insert(u) {
                let (gain, target) = fresh(u, &moved, &mut map);
                if target.is_some() {
                    queue.insert(graph, u, gain);
                }
            }
        }
    }
    moves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::graph::fixtures::*;
    use crate::graph::EdgeWeight;

    fn connections(graph: &Graph, partition: &Partition, v: NodeId) -> Vec<EdgeWeight> {
        let mut conn = vec![0; partition.k()];
        for (u, w) in graph.neighbors(v) {
            conn[partition.block_of(u) as usize] += w;
        }
        conn
    }

    #[test]
    fn gain_formula() {
        assert_eq!(relative_gain_value(4, 2), 8.0);
        assert_eq!(relative_gain_value(-4, 2), -2.0);
        assert_eq!(relative_gain_value(0, 5), 0.0);
    }

    #[test]
    fn no_admissible_block() {
        let g = path(3);
        let p = Partition::from_blocks(&g, vec![0, 1, 2], 3).unwrap();
        let (gain, target) = relative_gain(&g, &p, 1, &[1, 1, 1]);
        assert_eq!(gain, f64::NEG_INFINITY);
        assert_eq!(target, None);
    }

    #[test]
    fn gain_prefers_adjacent_block() {
        // node 1 of path 0-1-2-3 in block 0 with node 0; node 2 in block 1,
        // node 3 in block 2
        let g = path(4);
        let p = Partition::from_blocks(&g, vec![0, 0, 1, 2], 3).unwrap();
        let (gain, target) = relative_gain(&g, &p, 1, &[2, 2, 2]);
        assert_eq!(target, Some(1));
        assert_eq!(gain, 0.0);
        // with block 1 full, only the non-adjacent block 2 remains: d = -1
        let (gain, target) = relative_gain(&g, &p, 1, &[2, 1, 2]);
        assert_eq!(target, Some(2));
        assert_eq!(gain, -1.0);
    }

    #[test]
    fn weighted_example() {
        // block 0 holds nodes of weight 3 and 2, block 1 a node of weight 1;
        // limit 4 forces one node out
        let g = build_graph(3, &[(0, 1, 1), (1, 2, 1)], Some(vec![3, 2, 1])).unwrap();
        let mut p = Partition::from_blocks(&g, vec![0, 0, 1], 2).unwrap();
        let stats = balance(&g, &mut p, &[4, 4], 0);
        assert!(stats.feasible());
        assert_eq!(stats.moves, 1);
        assert!(p.block_weights().iter().all(|&w| w <= 4));
        assert!(p.weights_consistent(&g));
    }

    #[test]
    fn balanced_input_is_identity() {
        let g = grid(4, 4);
        let blocks: Vec<BlockId> = (0..16).map(|v| u32::from(v >= 8)).collect();
        let mut p = Partition::from_blocks(&g, blocks.clone(), 2).unwrap();
        let stats = balance(&g, &mut p, &[8, 8], 3);
        assert_eq!(stats.moves, 0);
        assert_eq!(p.blocks(), &blocks[..]);
    }

    #[test]
    fn everything_in_one_block() {
        let g = grid(10, 10);
        let mut p = Partition::from_blocks(&g, vec![0; 100], 4).unwrap();
        let stats = balance(&g, &mut p, &[25; 4], 1);
        assert!(stats.feasible());
        assert_eq!(stats.moves, 75);
        assert!(p.weights_consistent(&g));
    }

    #[test]
    fn target_filled_before_pop() {
        // Block 0 = {0, 1, 2} is overloaded by 2 (limit 1); both 1 and 2 are
        // best moved to block 1, which can take only one more node. The second
        // node must be re-targeted to block 2.
        let g = from_edges(6, &[(0, 1, 1), (1, 3, 1), (2, 3, 1), (0, 2, 1), (4, 5, 1)]);
        let mut p = Partition::from_blocks(&g, vec![0, 0, 0, 1, 2, 2], 3).unwrap();
        let limits = [1, 2, 3];
        let stats = balance(&g, &mut p, &limits, 7);
        assert!(stats.feasible());
        assert_eq!(stats.moves, 2);
        assert_eq!(p.block_weights(), &[1, 2, 3]);
    }

    #[test]
    fn connections_helper() {
        let g = path(3);
        let p = Partition::from_blocks(&g, vec![0, 1, 1], 2).unwrap();
        assert_eq!(connections(&g, &p, 1), vec![1, 1]);
    }
}
