use super::{EdgeWeight, Graph, NodeId, NodeWeight, MAX_NODES};
use crate::error::{Error, Result};

/// Incremental graph construction from an undirected edge list.
///
/// Parallel edges are merged by summing their weights. Self-loops are dropped
/// and counted.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n: usize,
    node_weights: Option<Vec<NodeWeight>>,
    edges: Vec<(NodeId, NodeId, EdgeWeight)>,
    dropped_self_loops: usize,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            node_weights: None,
            edges: Vec::new(),
            dropped_self_loops: 0,
        }
    }

    pub fn with_edge_capacity(mut self, m: usize) -> Self {
        self.edges.reserve(m);
        self
    }

    pub fn node_weights(mut self, weights: Vec<NodeWeight>) -> Self {
        self.node_weights = Some(weights);
        self
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId, weight: EdgeWeight) -> &mut Self {
        if u == v {
            self.dropped_self_loops += 1;
        } else {
            self.edges.push((u, v, weight));
        }
        self
    }

    pub fn dropped_self_loops(&self) -> usize {
        self.dropped_self_loops
    }

    pub fn build(self) -> Result<Graph> {
        let n = self.n;
        if n > MAX_NODES {
            return Err(Error::TooManyNodes { n, max: MAX_NODES });
        }
        let node_weights = match self.node_weights {
            Some(w) if w.len() != n => {
                return Err(Error::NodeWeightCount {
                    expected: n,
                    got: w.len(),
                })
            }
            Some(w) => w,
            None => vec![1; n],
        };
        if let Some(node) = node_weights.iter().position(|&w| w == 0) {
            return Err(Error::ZeroNodeWeight {
                node: node as NodeId,
            });
        }

        let mut degrees = vec![0usize; n + 1];
        for &(u, v, w) in &self.edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::NodeOutOfRange {
                    u: u as u64,
                    v: v as u64,
                    n,
                });
            }
            if w == 0 {
                return Err(Error::ZeroEdgeWeight { u, v });
            }
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }

        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degrees[v];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0 as NodeId, 0 as EdgeWeight); offsets[n]];
        for &(u, v, w) in &self.edges {
            adjacency[fill[u as usize]] = (v, w);
            fill[u as usize] += 1;
            adjacency[fill[v as usize]] = (u, w);
            fill[v as usize] += 1;
        }
        drop(fill);

        // Sort each range by target and merge duplicates in place.
        let mut targets = Vec::with_capacity(adjacency.len());
        let mut edge_weights = Vec::with_capacity(adjacency.len());
        let mut merged_offsets = vec![0usize; n + 1];
        for v in 0..n {
            let range = &mut adjacency[offsets[v]..offsets[v + 1]];
            range.sort_unstable_by_key(|&(t, _)| t);
            let mut last: Option<NodeId> = None;
            for &(t, w) in range.iter() {
                if last == Some(t) {
                    *edge_weights.last_mut().unwrap() += w;
                } else {
                    targets.push(t);
                    edge_weights.push(w);
                    last = Some(t);
                }
            }
            merged_offsets[v + 1] = targets.len();
        }

        Ok(Graph::from_csr(merged_offsets, targets, edge_weights, node_weights))
    }
}

/// Builds a graph with `n` nodes from an undirected weighted edge list.
///
/// `node_weights` defaults to unit weights. Parallel edges are merged by
/// summing their weights and self-loops are dropped.
pub fn build_graph(
    n: usize,
    edges: &[(NodeId, NodeId, EdgeWeight)],
    node_weights: Option<Vec<NodeWeight>>,
) -> Result<Graph> {
    let mut builder = GraphBuilder::new(n).with_edge_capacity(edges.len());
    if let Some(weights) = node_weights {
        builder = builder.node_weights(weights);
    }
    for &(u, v, w) in edges {
        builder.add_edge(u, v, w);
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let g = build_graph(3, &[(0, 1, 1), (1, 2, 1)], None).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.nodes().map(|v| g.degree(v)).collect::<Vec<_>>(), vec![1, 2, 1]);
    }

    #[test]
    fn parallel_edges_merge() {
        let g = build_graph(2, &[(0, 1, 2), (0, 1, 3)], None).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![(1, 5)]);
        assert_eq!(g.neighbors(1).collect::<Vec<_>>(), vec![(0, 5)]);
    }

    #[test]
    fn reversed_parallel_edges_merge() {
        let g = build_graph(2, &[(0, 1, 2), (1, 0, 3)], None).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 5)]);
    }

    #[test]
    fn singleton() {
        let g = build_graph(1, &[], Some(vec![7])).unwrap();
        assert_eq!(g.m(), 0);
        assert_eq!(g.total_node_weight(), 7);
        assert_eq!(g.max_node_weight(), 7);
    }

    #[test]
    fn self_loops_are_dropped_and_counted() {
        let mut b = GraphBuilder::new(2);
        b.add_edge(0, 0, 4).add_edge(0, 1, 1);
        assert_eq!(b.dropped_self_loops(), 1);
        let g = b.build().unwrap();
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_graph(2, &[(0, 2, 1)], None),
            Err(Error::NodeOutOfRange { .. })
        ));
        assert!(matches!(
            build_graph(2, &[(0, 1, 0)], None),
            Err(Error::ZeroEdgeWeight { u: 0, v: 1 })
        ));
        assert!(matches!(
            build_graph(2, &[], Some(vec![1, 0])),
            Err(Error::ZeroNodeWeight { node: 1 })
        ));
        assert!(matches!(
            build_graph(2, &[], Some(vec![1])),
            Err(Error::NodeWeightCount { expected: 2, got: 1 })
        ));
    }
}
