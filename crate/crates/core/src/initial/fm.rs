//! Two-way Fiduccia-Mattheyses refinement.

use rand::Rng as _;

use super::{Bipartition, SideTargets};
use crate::graph::{BlockId, EdgeWeight, Graph, NodeId, NodeWeight};
use crate::util::heap::IndexedMaxHeap;
use crate::util::random::{mix_seed, Rng};

/// Safety cap on passes; every pass that continues strictly improves
/// (overload, cut), so this is rarely reached.
const MAX_PASSES: usize = 64;

/// A pass stops after `n / 8` consecutive moves without a new best state,
/// clamped to this range.
const FRUITLESS_MOVES: std::ops::RangeInclusive<usize> = 10..=100;

/// Quality of a state: less overload first, then less cut.
type StateKey = (NodeWeight, EdgeWeight);

/// Refines `bipartition` in place with FM passes until a pass brings no
/// improvement.
///
/// Each pass repeatedly applies the best admissible move among unlocked
/// boundary nodes, locks the moved node, and finally rolls back to the best
/// state seen. A pass ends early after a run of moves that do not reach a new
/// best state. A move is admissible if the receiving side stays within its
/// limit plus the heaviest node weight, so a pass may briefly leave the
/// feasible region; while a side is overloaded, only moves out of it are
/// considered. States are ranked by overload and then cut, so a feasible input
/// never becomes infeasible and its cut never increases.
pub fn fm2way_refine(graph: &Graph, bipartition: &mut Bipartition, targets: &SideTargets, rng: &mut Rng) {
    if graph.n() < 2 {
        return;
    }
    let mut state = FmState::new(graph, bipartition);
    for _ in 0..MAX_PASSES {
        if !state.pass(graph, targets, rng) {
            break;
        }
    }
    bipartition.side_weights = state.weights;
    bipartition.cut = state.cut;
    bipartition.feasible = targets.is_feasible(state.weights);
    bipartition.sides = state.sides;
}

struct FmState {
    sides: Vec<BlockId>,
    weights: [NodeWeight; 2],
    cut: EdgeWeight,
    /// Weight of edges to the other side.
    external: Vec<EdgeWeight>,
    weighted_degree: Vec<EdgeWeight>,
    locked: Vec<bool>,
    queues: [IndexedMaxHeap<(i64, u32)>; 2],
    moves: Vec<NodeId>,
    tie_salt: u64,
}

impl FmState {
    fn new(graph: &Graph, bipartition: &Bipartition) -> Self {
        let n = graph.n();
        let sides = bipartition.sides.clone();
        let mut external = vec![0; n];
        let mut weighted_degree = vec![0; n];
        let mut twice_cut = 0;
        for v in graph.nodes() {
            for (u, w) in graph.neighbors(v) {
                weighted_degree[v as usize] += w;
                if sides[u as usize] != sides[v as usize] {
                    external[v as usize] += w;
                }
            }
            twice_cut += external[v as usize];
        }
        Self {
            sides,
            weights: bipartition.side_weights,
            cut: twice_cut / 2,
            external,
            weighted_degree,
            locked: vec![false; n],
            queues: [IndexedMaxHeap::new(n), IndexedMaxHeap::new(n)],
            moves: Vec::new(),
            tie_salt: 0,
        }
    }

    #[inline]
    fn gain(&self, v: NodeId) -> i64 {
        2 * self.external[v as usize] as i64 - self.weighted_degree[v as usize] as i64
    }

    /// Random tie-breaker of `v` for the current pass.
    #[inline]
    fn tie(&self, v: NodeId) -> u32 {
        mix_seed(self.tie_salt, v as u64) as u32
    }

    fn key(&self, targets: &SideTargets) -> StateKey {
        (targets.overload(self.weights), self.cut)
    }

    /// One pass; returns whether the state improved.
    fn pass(&mut self, graph: &Graph, targets: &SideTargets, rng: &mut Rng) -> bool {
        self.locked.fill(false);
        self.moves.clear();
        self.tie_salt = rng.random();
        for q in &mut self.queues {
            q.clear();
        }
        let overloaded = targets.overloaded_side(self.weights);
        for v in graph.nodes() {
            let side = self.sides[v as usize] as usize;
            if self.external[v as usize] > 0 || overloaded == Some(side) {
                self.queues[side].push(v, (self.gain(v), self.tie(v)));
            }
        }

        let limit = (graph.n() / 8).clamp(*FRUITLESS_MOVES.start(), *FRUITLESS_MOVES.end());
        let start_key = self.key(targets);
        let mut best_key = start_key;
        let mut best_prefix = 0;
        while let Some((v, from)) = self.select_move(graph, targets, rng) {
            self.apply_move(graph, v, from, targets);
            let key = self.key(targets);
            if key < best_key {
                best_key = key;
                best_prefix = self.moves.len();
            } else if self.moves.len() - best_prefix >= limit {
                break;
            }
        }
        while self.moves.len() > best_prefix {
            let v = self.moves.pop().unwrap();
            self.flip(graph, v);
        }
        best_key < start_key
    }

    /// Picks the next move, discarding queue tops that cannot move.
    fn select_move(&mut self, graph: &Graph, targets: &SideTargets, rng: &mut Rng) -> Option<(NodeId, usize)> {
        let overloaded = targets.overloaded_side(self.weights);
        let slack = graph.max_node_weight();
        let mut candidates: [Option<(NodeId, i64)>; 2] = [None, None];
        for from in 0..2 {
            if overloaded.is_some_and(|s| s != from) {
                continue;
            }
            let to = 1 - from;
            while let Some((v, (gain, _))) = self.queues[from].peek() {
                if self.weights[to] + graph.node_weight(v) <= targets.max[to] + slack {
                    candidates[from] = Some((v, gain));
                    break;
                }
                // cannot move during this pass
                self.queues[from].remove(v);
                self.locked[v as usize] = true;
            }
        }
        let pick = match candidates {
            [None, None] => return None,
            [Some(_), None] => 0,
            [None, Some(_)] => 1,
            [Some((_, g0)), Some((_, g1))] => {
                if g0 != g1 {
                    usize::from(g1 > g0)
                } else {
                    // equal gains: move out of the relatively heavier side
                    let load0 = self.weights[0] as u128 * targets.ratio[1] as u128;
                    let load1 = self.weights[1] as u128 * targets.ratio[0] as u128;
                    match load0.cmp(&load1) {
                        std::cmp::Ordering::Greater => 0,
                        std::cmp::Ordering::Less => 1,
                        std::cmp::Ordering::Equal => usize::from(rng.random::<bool>()),
                    }
                }
            }
        };
        candidates[pick].map(|(v, _)| (v, pick))
    }

    fn apply_move(&mut self, graph: &Graph, v: NodeId, from: usize, targets: &SideTargets) {
        self.queues[from].remove(v);
        self.locked[v as usize] = true;
        self.flip(graph, v);
        self.moves.push(v);
        let overloaded = targets.overloaded_side(self.weights);
        for &u in graph.adjacent_nodes(v) {
            if self.locked[u as usize] {
                continue;
            }
            let side = self.sides[u as usize] as usize;
            let gain = self.gain(u);
            let tie = self.tie(u);
            let queue = &mut self.queues[side];
            match queue.key(u) {
                Some((_, tie)) => queue.set(u, (gain, tie)),
                None if self.external[u as usize] > 0 || overloaded == Some(side) => {
                    queue.push(u, (gain, tie))
                }
                None => {}
            }
        }
    }

    /// Moves `v` to the other side and updates weights, cut and external
    /// degrees.
    fn flip(&mut self, graph: &Graph, v: NodeId) {
        let from = self.sides[v as usize] as usize;
        let to = 1 - from;
        let w = graph.node_weight(v);
        self.weights[from] -= w;
        self.weights[to] += w;
        self.sides[v as usize] = to as BlockId;
        let old_external = self.external[v as usize];
        let new_external = self.weighted_degree[v as usize] - old_external;
        self.external[v as usize] = new_external;
        self.cut = self.cut + new_external - old_external;
        for (u, ew) in graph.neighbors(v) {
            if self.sides[u as usize] as usize == to {
                self.external[u as usize] -= ew;
            } else {
                self.external[u as usize] += ew;
            }
        }
    }
}
