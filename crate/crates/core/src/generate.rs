//! Synthetic graph generators for testing and benchmarking.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, NodeId};
use crate::util::random::rng_from_seed;

/// `width x height` grid with 4-neighborhoods and unit weights. Node
/// `y * width + x` sits at column `x`, row `y`.
pub fn grid(width: usize, height: usize) -> Result<Graph> {
    let n = width.checked_mul(height).ok_or(Error::InvalidParameter("grid is too large".into()))?;
    let mut builder = GraphBuilder::new(n).with_edge_capacity(2 * n);
    for y in 0..height {
        for x in 0..width {
            let v = (y * width + x) as NodeId;
            if x + 1 < width {
                builder.add_edge(v, v + 1, 1);
            }
            if y + 1 < height {
                builder.add_edge(v, v + width as NodeId, 1);
            }
        }
    }
    builder.build()
}

/// Random geometric graph: `n` points uniform in the unit square, connected
/// if closer than the radius that yields `avg_degree` expected neighbors.
pub fn random_geometric(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if !(avg_degree > 0.0) {
        return Err(Error::InvalidParameter("average degree must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let radius = (avg_degree / (std::f64::consts::PI * n.max(1) as f64)).sqrt().min(1.0);
    let cells = ((1.0 / radius).floor() as usize).max(1);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let cell_of = |p: (f64, f64)| {
        let cx = ((p.0 * cells as f64) as usize).min(cells - 1);
        let cy = ((p.1 * cells as f64) as usize).min(cells - 1);
        (cx, cy)
    };
    // bucket points by cell
    let mut start = vec![0usize; cells * cells + 1];
    for &p in &points {
        let (cx, cy) = cell_of(p);
        start[cy * cells + cx + 1] += 1;
    }
    for i in 0..cells * cells {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut by_cell = vec![0 as NodeId; n];
    for (v, &p) in points.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        by_cell[fill[cy * cells + cx]] = v as NodeId;
        fill[cy * cells + cx] += 1;
    }

    let r2 = radius * radius;
    let expected_edges = (avg_degree * n as f64 / 2.0) as usize;
    let mut builder = GraphBuilder::new(n).with_edge_capacity(expected_edges + expected_edges / 8);
    for (u, &p) in points.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        for ny in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                let cell = ny * cells + nx;
                for &v in &by_cell[start[cell]..start[cell + 1]] {
                    if (v as usize) <= u {
                        continue;
                    }
                    let q = points[v as usize];
                    let (dx, dy) = (p.0 - q.0, p.1 - q.1);
                    if dx * dx + dy * dy < r2 {
                        builder.add_edge(u as NodeId, v, 1);
                    }
                }
            }
        }
    }
    builder.build()
}

/// Quadrant probabilities of the recursive matrix model; the fourth is
/// `1 - a - b - c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatProbabilities {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for RmatProbabilities {
    fn default() -> Self {
        Self { a: 0.57, b: 0.19, c: 0.19 }
    }
}

/// RMAT-like graph with `2^scale` nodes and `edge_factor * 2^scale` sampled
/// edges. Duplicates and self-loops are discarded, so the result has unit
/// weights and somewhat fewer edges. Node ids are randomly permuted.
pub fn rmat(scale: u32, edge_factor: usize, probabilities: RmatProbabilities, seed: u64) -> Result<Graph> {
    if scale > 30 {
        return Err(Error::InvalidParameter(format!("scale {scale} is too large")));
    }
    let RmatProbabilities { a, b, c } = probabilities;
    if a < 0.0 || b < 0.0 || c < 0.0 || a + b + c > 1.0 {
        return Err(Error::InvalidParameter("quadrant probabilities must be non-negative and sum to at most 1".into()));
    }
    let n = 1usize << scale;
    let samples = edge_factor.saturating_mul(n);
    let mut rng = rng_from_seed(seed);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (mut u, mut v) = (0usize, 0usize);
        for _ in 0..scale {
            let r: f64 = rng.random();
            let (du, dv) = if r < a {
                (0, 0)
            } else if r < a + b {
                (0, 1)
            } else if r < a + b + c {
                (1, 0)
            } else {
                (1, 1)
            };
            u = 2 * u + du;
            v = 2 * v + dv;
        }
        if u != v {
            edges.push((u.min(v) as NodeId, u.max(v) as NodeId));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut relabel: Vec<NodeId> = (0..n as NodeId).collect();
    relabel.shuffle(&mut rng);
    let mut builder = GraphBuilder::new(n).with_edge_capacity(edges.len());
    for (u, v) in edges {
        builder.add_edge(relabel[u as usize], relabel[v as usize], 1);
    }
    builder.build()
}
