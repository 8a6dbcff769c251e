//! METIS graph files and partition files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::error::Error;
use crate::graph::{BlockId, EdgeWeight, Graph, NodeId, NodeWeight, MAX_NODES};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },

    #[error("line {line}: `{token}` is not a valid {expected}")]
    InvalidToken { line: usize, token: String, expected: &'static str },

    #[error("line {line}: neighbor {neighbor} of node {node} is out of range (n = {n})")]
    NeighborOutOfRange { line: usize, node: u64, neighbor: u64, n: usize },

    #[error("line {line}: node {node} lists itself as a neighbor")]
    SelfLoop { line: usize, node: u64 },

    #[error("line {line}: node {node} lists neighbor {neighbor} more than once")]
    DuplicateEdge { line: usize, node: u64, neighbor: u64 },

    #[error("line {line}: node {node} has a neighbor without an edge weight")]
    MissingEdgeWeight { line: usize, node: u64 },

    #[error("line {line}: {what} weight must be positive")]
    ZeroWeight { line: usize, what: &'static str },

    #[error(
        "asymmetric adjacency: node {u} (line {line_u}) lists {v} with weight {weight}, \
         but node {v} (line {line_v}) has no matching entry"
    )]
    Asymmetric { u: u64, v: u64, weight: EdgeWeight, line_u: usize, line_v: usize },

    #[error("line {line}: adjacency lists exceed the {declared} edges declared in the header")]
    DegreeOverflow { line: usize, declared: u64 },

    #[error("header declares {declared} edges, adjacency lists contain {found}")]
    EdgeCount { declared: u64, found: u64 },

    #[error("expected {expected} node lines, found {found}")]
    MissingNodes { expected: usize, found: usize },

    #[error("line {line}: unexpected content after the last node")]
    TrailingContent { line: usize },

    #[error("line {line}: expected one block id, found `{content}`")]
    PartitionLine { line: usize, content: String },

    #[error("line {line}: block id {block} is not below k = {k}")]
    BlockOutOfRange { line: usize, block: u64, k: BlockId },

    #[error("partition file has {found} lines, graph has {expected} nodes")]
    PartitionLength { expected: usize, found: usize },

    #[error(transparent)]
    Graph(#[from] Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Header {
    n: usize,
    m: u64,
    has_node_sizes: bool,
    has_node_weights: bool,
    has_edge_weights: bool,
    ncon: usize,
}

fn parse_number<T: std::str::FromStr>(token: &str, line: usize, expected: &'static str) -> Result<T> {
    token.parse().map_err(|_| FormatError::InvalidToken {
        line,
        token: token.to_string(),
        expected,
    })
}

fn parse_header(content: &str, line: usize) -> Result<Header> {
    let tokens: Vec<&str> = content.split_whitespace().collect();
    let header_error = |reason: String| FormatError::Header { line, reason };
    if tokens.len() < 2 || tokens.len() > 4 {
        return Err(header_error(format!("expected `n m [fmt [ncon]]`, found {} fields", tokens.len())));
    }
    let n: usize = tokens[0]
        .parse()
        .map_err(|_| header_error(format!("node count `{}` is not a number", tokens[0])))?;
    let m: u64 = tokens[1]
        .parse()
        .map_err(|_| header_error(format!("edge count `{}` is not a number", tokens[1])))?;
    let fmt = tokens.get(2).copied().unwrap_or("0");
    if fmt.len() > 3 || !fmt.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(header_error(format!("format `{fmt}` must consist of at most three 0/1 digits")));
    }
    let digits: Vec<bool> = format!("{fmt:0>3}").bytes().map(|b| b == b'1').collect();
    let ncon: usize = match tokens.get(3) {
        Some(t) => t
            .parse()
            .map_err(|_| header_error(format!("constraint count `{t}` is not a number")))?,
        None => 1,
    };
    if ncon != 1 {
        return Err(header_error(format!("{ncon} node weights per node are not supported")));
    }
    if n > MAX_NODES {
        return Err(Error::TooManyNodes { n, max: MAX_NODES }.into());
    }
    Ok(Header {
        n,
        m,
        has_node_sizes: digits[0],
        has_node_weights: digits[1],
        has_edge_weights: digits[2],
        ncon,
    })
}

/// Parses a graph in METIS format.
///
/// Lines starting with `%` are comments. Node and edge weights default to 1.
/// Adjacency lists must be symmetric (same weight in both directions) and free
/// of self-loops and duplicate neighbors.
pub fn parse_metis(input: &str) -> Result<Graph> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.starts_with('%'));
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break parse_header(l, i)?,
            None => {
                return Err(FormatError::Header {
                    line: 1,
                    reason: "file is empty".into(),
                })
            }
        }
    };
    let n = header.n;
    let max_arcs = header.m.saturating_mul(2);

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0usize);
    let mut targets: Vec<NodeId> = Vec::with_capacity(max_arcs.min(1 << 28) as usize);
    let mut edge_weights: Vec<EdgeWeight> = Vec::with_capacity(targets.capacity());
    let mut node_weights: Vec<NodeWeight> = Vec::with_capacity(n);
    let mut line_of: Vec<usize> = Vec::with_capacity(n);

    for u in 0..n {
        let Some((line, content)) = lines.next() else {
            return Err(FormatError::MissingNodes { expected: n, found: u });
        };
        line_of.push(line);
        let node = u as u64 + 1;
        let mut tokens = content.split_whitespace();
        if header.has_node_sizes {
            if let Some(t) = tokens.next() {
                parse_number::<u64>(t, line, "node size")?;
            }
        }
        let mut weight = 1;
        if header.has_node_weights {
            for _ in 0..header.ncon {
                if let Some(t) = tokens.next() {
                    weight = parse_number::<NodeWeight>(t, line, "node weight")?;
                }
            }
            if weight == 0 {
                return Err(FormatError::ZeroWeight { line, what: "node" });
            }
        }
        node_weights.push(weight);
        let start = targets.len();
        while let Some(t) = tokens.next() {
            let v: u64 = parse_number(t, line, "neighbor id")?;
            if v == 0 || v > n as u64 {
                return Err(FormatError::NeighborOutOfRange { line, node, neighbor: v, n });
            }
            if v == node {
                return Err(FormatError::SelfLoop { line, node });
            }
            let w = if header.has_edge_weights {
                let t = tokens.next().ok_or(FormatError::MissingEdgeWeight { line, node })?;
                let w: EdgeWeight = parse_number(t, line, "edge weight")?;
                if w == 0 {
                    return Err(FormatError::ZeroWeight { line, what: "edge" });
                }
                w
            } else {
                1
            };
            if targets.len() as u64 >= max_arcs {
                return Err(FormatError::DegreeOverflow { line, declared: header.m });
            }
            targets.push((v - 1) as NodeId);
            edge_weights.push(w);
        }
        // sort the list by neighbor id and reject duplicates
        let mut pairs: Vec<(NodeId, EdgeWeight)> = targets[start..]
            .iter()
            .copied()
            .zip(edge_weights[start..].iter().copied())
            .collect();
        pairs.sort_unstable_by_key(|&(v, _)| v);
        if let Some(d) = pairs.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(FormatError::DuplicateEdge {
                line,
                node,
                neighbor: d[0].0 as u64 + 1,
            });
        }
        for (i, (v, w)) in pairs.into_iter().enumerate() {
            targets[start + i] = v;
            edge_weights[start + i] = w;
        }
        offsets.push(targets.len());
    }
    for (line, content) in lines {
        if !content.trim().is_empty() {
            return Err(FormatError::TrailingContent { line });
        }
    }

    // symmetry
    let asymmetric = (0..n).into_par_iter().find_map_first(|u| {
        (offsets[u]..offsets[u + 1]).find_map(|e| {
            let v = targets[e] as usize;
            let w = edge_weights[e];
            let list = &targets[offsets[v]..offsets[v + 1]];
            match list.binary_search(&(u as NodeId)) {
                Ok(i) if edge_weights[offsets[v] + i] == w => None,
                _ => Some(FormatError::Asymmetric {
                    u: u as u64 + 1,
                    v: v as u64 + 1,
                    weight: w,
                    line_u: line_of[u],
                    line_v: line_of[v],
                }),
            }
        })
    });
    if let Some(e) = asymmetric {
        return Err(e);
    }
    if targets.len() as u64 != max_arcs {
        return Err(FormatError::EdgeCount {
            declared: header.m,
            found: targets.len() as u64 / 2,
        });
    }
    Ok(Graph::from_csr(offsets, targets, edge_weights, node_weights))
}

/// Reads a METIS graph file.
pub fn read_metis(path: impl AsRef<Path>) -> Result<Graph> {
    let mut content = String::new();
    File::open(path)?.read_to_string(&mut content)?;
    parse_metis(&content)
}

/// Writes `graph` in METIS format. Weights are only written if some weight
/// differs from 1.
pub fn write_metis(graph: &Graph, writer: impl Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(writer);
    let node_weights = graph.node_weights().iter().any(|&w| w != 1);
    let edge_weights = graph.nodes().any(|v| graph.neighbors(v).any(|(_, w)| w != 1));
    write!(out, "{} {}", graph.n(), graph.m())?;
    match (node_weights, edge_weights) {
        (false, false) => writeln!(out)?,
        (false, true) => writeln!(out, " 1")?,
        (true, false) => writeln!(out, " 10")?,
        (true, true) => writeln!(out, " 11")?,
    }
    for v in graph.nodes() {
        let mut first = true;
        let mut sep = |out: &mut BufWriter<_>| -> std::io::Result<()> {
            if !std::mem::take(&mut first) {
                out.write_all(b" ")?;
            }
            Ok(())
        };
        if node_weights {
            sep(&mut out)?;
            write!(out, "{}", graph.node_weight(v))?;
        }
        for (u, w) in graph.neighbors(v) {
            sep(&mut out)?;
            write!(out, "{}", u + 1)?;
            if edge_weights {
                write!(out, " {w}")?;
            }
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Writes `graph` to a METIS file.
pub fn write_metis_file(graph: &Graph, path: impl AsRef<Path>) -> std::io::Result<()> {
    write_metis(graph, File::create(path)?)
}

/// Writes one block id per line.
pub fn write_partition(blocks: &[BlockId], writer: impl Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(writer);
    for b in blocks {
        writeln!(out, "{b}")?;
    }
    out.flush()
}

pub fn write_partition_file(blocks: &[BlockId], path: impl AsRef<Path>) -> std::io::Result<()> {
    write_partition(blocks, File::create(path)?)
}

/// Block assignment read from a partition file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionFile {
    pub blocks: Vec<BlockId>,
    /// Number of blocks: the given `k`, or the largest id plus one.
    pub k: BlockId,
    /// Ids below `k` that no node uses.
    pub empty_blocks: Vec<BlockId>,
}

/// Reads a partition file for a graph with `n` nodes. With `k` given, ids must
/// be below `k`.
pub fn read_partition(reader: impl Read, n: usize, k: Option<BlockId>) -> Result<PartitionFile> {
    let mut blocks = Vec::with_capacity(n);
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let content = line.trim();
        if content.is_empty() {
            continue;
        }
        let block: u64 = content.parse().map_err(|_| FormatError::PartitionLine {
            line: line_no,
            content: content.to_string(),
        })?;
        if let Some(k) = k {
            if block >= k as u64 {
                return Err(FormatError::BlockOutOfRange { line: line_no, block, k });
            }
        }
        let block = BlockId::try_from(block).map_err(|_| FormatError::PartitionLine {
            line: line_no,
            content: content.to_string(),
        })?;
        blocks.push(block);
    }
    if blocks.len() != n {
        return Err(FormatError::PartitionLength {
            expected: n,
            found: blocks.len(),
        });
    }
    let k = k.unwrap_or_else(|| blocks.iter().max().map_or(0, |&b| b + 1));
    let mut used = vec![false; k as usize];
    for &b in &blocks {
        used[b as usize] = true;
    }
    let empty_blocks = (0..k).filter(|&b| !used[b as usize]).collect();
    Ok(PartitionFile { blocks, k, empty_blocks })
}

pub fn read_partition_file(path: impl AsRef<Path>, n: usize, k: Option<BlockId>) -> Result<PartitionFile> {
    read_partition(File::open(path)?, n, k)
}
