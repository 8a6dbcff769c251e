//! Flat (single-level) bipartitioning heuristics.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{Bipartition, SideTargets};
use crate::graph::{BlockId, Graph, NodeId};
use crate::util::heap::IndexedMaxHeap;
use crate::util::random::Rng;

const UNASSIGNED: BlockId = BlockId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlatAlgorithm {
    Random,
    Bfs,
    GreedyGraphGrowing,
}

impl FlatAlgorithm {
    pub const ALL: [FlatAlgorithm; 3] = [
        FlatAlgorithm::Random,
        FlatAlgorithm::Bfs,
        FlatAlgorithm::GreedyGraphGrowing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlatAlgorithm::Random => "random",
            FlatAlgorithm::Bfs => "bfs",
            FlatAlgorithm::GreedyGraphGrowing => "greedy_graph_growing",
        }
    }
}

/// Runs one flat algorithm. Growing algorithms start from a random node.
pub fn flat_bipartition(algorithm: FlatAlgorithm, graph: &Graph, targets: &SideTargets, rng: &mut Rng) -> Bipartition {
    if graph.n() == 0 {
        return Bipartition::from_sides(graph, Vec::new(), targets);
    }
    match algorithm {
        FlatAlgorithm::Random => random_bipartition(graph, targets, rng),
        FlatAlgorithm::Bfs => {
            let start = rng.random_range(0..graph.n() as NodeId);
            bfs_bipartition(graph, targets, start, rng)
        }
        FlatAlgorithm::GreedyGraphGrowing => {
            let start = rng.random_range(0..graph.n() as NodeId);
            greedy_graph_growing(graph, targets, start, rng)
        }
    }
}

/// Assigns nodes in random order to the relatively lighter side that can take
/// them (or the relatively lighter side if neither can).
pub fn random_bipartition(graph: &Graph, targets: &SideTargets, rng: &mut Rng) -> Bipartition {
    let mut order: Vec<NodeId> = graph.nodes().collect();
    order.shuffle(rng);
    let mut sides = vec![0; graph.n()];
    let mut weights = [0u64; 2];
    for v in order {
        let w = graph.node_weight(v);
        let lighter = targets.relatively_lighter(weights);
        let other = 1 - lighter;
        let side = if weights[lighter] + w <= targets.max[lighter] {
            lighter
        } else if weights[other] + w <= targets.max[other] {
            other
        } else {
            lighter
        };
        sides[v as usize] = side as BlockId;
        weights[side] += w;
    }
    Bipartition::from_sides(graph, sides, targets)
}

/// Breadth-first search from `start` claims side 0 until it reaches its target
/// weight; everything else is side 1. Nodes that would push side 0 past its
/// limit are skipped. Exhausted components restart from a random unvisited
/// node.
pub fn bfs_bipartition(graph: &Graph, targets: &SideTargets, start: NodeId, rng: &mut Rng) -> Bipartition {
    let n = graph.n();
    let mut sides = vec![UNASSIGNED; n];
    let mut visited = vec![false; n];
    let mut weight0 = 0;
    let mut queue = VecDeque::new();
    let mut unvisited: Vec<NodeId> = graph.nodes().collect();
    unvisited.shuffle(rng);
    let mut cursor = 0;
    queue.push_back(start);
    visited[start as usize] = true;
    while !targets.reached_target0(weight0) {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => {
                while cursor < n && visited[unvisited[cursor] as usize] {
                    cursor += 1;
                }
                let Some(&u) = unvisited.get(cursor) else {
                    break;
                };
                visited[u as usize] = true;
                u
            }
        };
        let w = graph.node_weight(v);
        if weight0 + w > targets.max[0] {
            continue;
        }
        sides[v as usize] = 0;
        weight0 += w;
        for &u in graph.adjacent_nodes(v) {
            if !visited[u as usize] {
                visited[u as usize] = true;
                queue.push_back(u);
            }
        }
    }
    for s in sides.iter_mut() {
        if *s == UNASSIGNED {
            *s = 1;
        }
    }
    Bipartition::from_sides(graph, sides, targets)
}

/// Like [`bfs_bipartition`], but the frontier node whose addition to side 0
/// increases the cut the least (connection to side 0 minus connection to the
/// rest) is taken next.
pub fn greedy_graph_growing(graph: &Graph, targets: &SideTargets, start: NodeId, rng: &mut Rng) -> Bipartition {
    let n = graph.n();
    let mut in_side0 = vec![false; n];
    let mut skipped = vec![false; n];
    // gain[v] = weight to side 0 - weight to the rest
    let mut gain: Vec<i64> = graph
        .nodes()
        .map(|v| -(graph.neighbors(v).map(|(_, w)| w as i64).sum::<i64>()))
        .collect();
    let mut frontier: IndexedMaxHeap<(i64, u32)> = IndexedMaxHeap::new(n);
    let mut unvisited: Vec<NodeId> = graph.nodes().collect();
    unvisited.shuffle(rng);
    let mut cursor = 0;
    let mut weight0 = 0;
    frontier.push(start, (gain[start as usize], rng.random()));
    while !targets.reached_target0(weight0) {
        let v = match frontier.pop() {
            Some((v, _)) => v,
            None => {
                while cursor < n && (in_side0[unvisited[cursor] as usize] || skipped[unvisited[cursor] as usize]) {
                    cursor += 1;
                }
                let Some(&u) = unvisited.get(cursor) else {
                    break;
                };
                u
            }
        };
        let w = graph.node_weight(v);
        if weight0 + w > targets.max[0] {
            skipped[v as usize] = true;
            continue;
        }
        in_side0[v as usize] = true;
        weight0 += w;
        for (u, ew) in graph.neighbors(v) {
            if in_side0[u as usize] || skipped[u as usize] {
                continue;
            }
            gain[u as usize] += 2 * ew as i64;
            let tie = frontier.key(u).map_or_else(|| rng.random(), |(_, t)| t);
            frontier.set(u, (gain[u as usize], tie));
        }
    }
    let sides = in_side0.iter().map(|&s| BlockId::from(!s)).collect();
    Bipartition::from_sides(graph, sides, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::util::random::rng_from_seed;

    #[test]
    fn bfs_on_path() {
        let g = path(4);
        let targets = SideTargets::balanced(4, 0.0);
        let b = bfs_bipartition(&g, &targets, 0, &mut rng_from_seed(0));
        assert_eq!(b.sides, vec![0, 0, 1, 1]);
        assert_eq!(b.cut, 1);
    }

    #[test]
    fn greedy_growing_keeps_seed_triangle() {
        let g = two_triangles();
        let targets = SideTargets::balanced(6, 0.03);
        for start in 0..3 {
            for seed in 0..5 {
                let b = greedy_graph_growing(&g, &targets, start, &mut rng_from_seed(seed));
                assert_eq!(b.cut, 1);
                assert_eq!(&b.sides[..3], &[0, 0, 0]);
            }
        }
    }

    #[test]
    fn single_node() {
        let g = crate::graph::build_graph(1, &[], None).unwrap();
        let targets = SideTargets::balanced(1, 0.03);
        for algorithm in FlatAlgorithm::ALL {
            let b = flat_bipartition(algorithm, &g, &targets, &mut rng_from_seed(1));
            assert_eq!(b.side_weights, [1, 0]);
        }
    }

    #[test]
    fn random_respects_limits_on_unit_weights() {
        let g = grid(9, 9);
        let targets = SideTargets::balanced(81, 0.03);
        for seed in 0..10 {
            let b = random_bipartition(&g, &targets, &mut rng_from_seed(seed));
            assert!(b.feasible);
            assert_eq!(b.side_weights[0] + b.side_weights[1], 81);
        }
    }

    #[test]
    fn growing_covers_disconnected_graphs() {
        let g = from_edges(8, &[(0, 1, 1), (2, 3, 1), (4, 5, 1), (6, 7, 1)]);
        let targets = SideTargets::balanced(8, 0.0);
        for algorithm in [FlatAlgorithm::Bfs, FlatAlgorithm::GreedyGraphGrowing] {
            let b = flat_bipartition(algorithm, &g, &targets, &mut rng_from_seed(3));
            assert_eq!(b.side_weights, [4, 4]);
        }
    }
}
