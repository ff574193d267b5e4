//! Plain undirected graphs in compressed adjacency form, edge-list ingestion,
//! ground-truth correspondence loading, and structural-noise perturbation.

use std::collections::HashMap;
use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Immutable undirected plain graph. Node indices are dense in
/// `[0, node_count)`; adjacency is stored as sorted CSR neighbor lists with
/// no self-loops and no duplicate edges.
#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    degrees: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list, dropping self-loops and duplicate
    /// edges. Errors if an endpoint index is out of range.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let (graph, _dropped) = Graph::from_edges_counted(node_count, edges)?;
        Ok(graph)
    }

    /// Like [`Graph::from_edges`] but also reports how many self-loops and
    /// duplicate edges were dropped.
    pub fn from_edges_counted(
        node_count: usize,
        edges: &[(usize, usize)],
    ) -> Result<(Graph, DroppedEdges)> {
        let mut dropped = DroppedEdges::default();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut unique = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= node_count {
                return Err(Error::NodeOutOfRange {
                    index: u,
                    node_count,
                });
            }
            if v >= node_count {
                return Err(Error::NodeOutOfRange {
                    index: v,
                    node_count,
                });
            }
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            let pair = (u.min(v) as u32, u.max(v) as u32);
            if seen.insert(pair) {
                unique.push(pair);
            } else {
                dropped.duplicates += 1;
            }
        }
        unique.sort_unstable();

        let mut degrees = vec![0u32; node_count];
        for &(u, v) in &unique {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        let mut running = 0usize;
        for &d in &degrees {
            running += d as usize;
            offsets.push(running);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; running];
        for &(u, v) in &unique {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for i in 0..node_count {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }

        Ok((
            Graph {
                node_count,
                edges: unique,
                offsets,
                neighbors,
                degrees,
            },
            dropped,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Deduplicated edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0) as usize
    }

    /// First node with degree zero, if any.
    pub fn isolated_node(&self) -> Option<usize> {
        self.degrees.iter().position(|&d| d == 0)
    }
}

/// Counts of input edges dropped while constructing a [`Graph`].
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DroppedEdges {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Bijection between external node labels and dense internal indices,
/// in first-appearance order.
#[derive(Debug, Clone, Default)]
pub struct NodeLabelMap {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeLabelMap {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label_of(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Identity map over `0..n` with labels `"0"`, `"1"`, ...
    pub fn identity(n: usize) -> NodeLabelMap {
        let mut map = NodeLabelMap::default();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }
}

/// Result of parsing an edge-list file.
#[derive(Debug)]
pub struct EdgeListParse {
    pub graph: Graph,
    pub labels: NodeLabelMap,
    pub dropped: DroppedEdges,
}

/// Parses an edge-list text stream: one edge per line, two whitespace- or
/// tab-separated node labels, `#`-prefixed comment lines and blank lines
/// ignored. Labels are remapped to dense indices in first-appearance order;
/// self-loops and duplicate edges are dropped and counted.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<EdgeListParse> {
    let mut labels = NodeLabelMap::default();
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::MalformedLine {
                    line: lineno + 1,
                    found: trimmed.to_owned(),
                })
            }
        };
        let u = labels.intern(a);
        let v = labels.intern(b);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::EmptyEdgeList);
    }
    let (graph, dropped) = Graph::from_edges_counted(labels.len(), &edges)?;
    Ok(EdgeListParse {
        graph,
        labels,
        dropped,
    })
}

/// Writes a graph back to edge-list text using the given label map.
pub fn write_edge_list<W: Write>(graph: &Graph, labels: &NodeLabelMap, mut w: W) -> Result<()> {
    for &(u, v) in graph.edges() {
        writeln!(
            w,
            "{}\t{}",
            labels.label_of(u as usize),
            labels.label_of(v as usize)
        )?;
    }
    Ok(())
}

/// Ground-truth node correspondences, one-to-one on both sides.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    pairs: Vec<(usize, usize)>,
    set: HashSet<(usize, usize)>,
}

impl GroundTruth {
    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> GroundTruth {
        let set = pairs.iter().copied().collect();
        GroundTruth { pairs, set }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains(&self, source: usize, target: usize) -> bool {
        self.set.contains(&(source, target))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Parses a correspondence file: two labels per line, resolved through the
/// source and target graphs' label maps. Errors on unknown labels and on any
/// source or target label that appears twice.
pub fn parse_correspondences<R: BufRead>(
    reader: R,
    source_labels: &NodeLabelMap,
    target_labels: &NodeLabelMap,
) -> Result<GroundTruth> {
    let mut pairs = Vec::new();
    let mut seen_source = HashSet::new();
    let mut seen_target = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::MalformedLine {
                    line: lineno + 1,
                    found: trimmed.to_owned(),
                })
            }
        };
        let u = source_labels
            .index_of(a)
            .ok_or_else(|| Error::UnknownLabel {
                line: lineno + 1,
                label: a.to_owned(),
            })?;
        let v = target_labels
            .index_of(b)
            .ok_or_else(|| Error::UnknownLabel {
                line: lineno + 1,
                label: b.to_owned(),
            })?;
        if !seen_source.insert(u) {
            return Err(Error::DuplicateCorrespondence {
                line: lineno + 1,
                side: "source",
                label: a.to_owned(),
            });
        }
        if !seen_target.insert(v) {
            return Err(Error::DuplicateCorrespondence {
                line: lineno + 1,
                side: "target",
                label: b.to_owned(),
            });
        }
        pairs.push((u, v));
    }
    Ok(GroundTruth::from_pairs(pairs))
}

/// Removes `floor(ratio * |E|)` edges uniformly at random without isolating
/// any node. Candidate edges are sampled uniformly and removals that would
/// drop an endpoint to degree zero are rejected; after `100 * floor(ratio *
/// |E|)` rejections the perturbation is declared infeasible. Deterministic
/// for a fixed seed.
pub fn perturb_edges(graph: &Graph, ratio: f64, seed: u64) -> Result<Graph> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidRatio { ratio });
    }
    let target = (ratio * graph.edge_count() as f64).floor() as usize;
    if target == 0 {
        return Ok(graph.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = graph.edges().to_vec();
    let mut degrees = graph.degrees().to_vec();
    let mut removed = 0usize;
    let mut rejections = 0usize;
    let budget = 100 * target;
    while removed < target {
        let idx = rng.random_range(0..edges.len());
        let (u, v) = edges[idx];
        if degrees[u as usize] >= 2 && degrees[v as usize] >= 2 {
            edges.swap_remove(idx);
            degrees[u as usize] -= 1;
            degrees[v as usize] -= 1;
            removed += 1;
        } else {
            rejections += 1;
            if rejections >= budget {
                return Err(Error::PerturbationInfeasible {
                    requested: target,
                    removed,
                });
            }
        }
    }
    let remaining: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(u, v)| (u as usize, v as usize))
        .collect();
    Graph::from_edges(graph.node_count(), &remaining)
}
