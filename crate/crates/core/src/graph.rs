//! Spatial centerline graphs: nodes with 3D coordinates joined by straight
//! undirected edges.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::union_find::DisjointSet;

/// Undirected graph embedded in 3D.
///
/// Edges are stored as `(i, j)` with `i < j`, in insertion order. Isolated
/// nodes are allowed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpatialGraph {
    nodes: Vec<Point3>,
    edges: Vec<(usize, usize)>,
}

/// Connected components (`beta0`) and independent cycles (`beta1`) of a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiPair {
    pub beta0: usize,
    pub beta1: usize,
}

impl BettiPair {
    pub const fn new(beta0: usize, beta1: usize) -> Self {
        Self { beta0, beta1 }
    }
}

impl std::fmt::Display for BettiPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.beta0, self.beta1)
    }
}

impl SpatialGraph {
    /// Builds a graph, validating indices, self-loops, duplicates and finiteness.
    /// Edges given as `(j, i)` with `j > i` are flipped to `(i, j)`.
    pub fn new(nodes: Vec<Point3>, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (k, p) in nodes.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "node {k} has non-finite coordinate {p:?}"
                )));
            }
        }
        let n = nodes.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (index, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidEdge {
                    index,
                    i,
                    j,
                    reason: "node index out of range",
                });
            }
            if i == j {
                return Err(Error::InvalidEdge {
                    index,
                    i,
                    j,
                    reason: "self-loop",
                });
            }
            let e = (i.min(j), i.max(j));
            if !seen.insert(e) {
                return Err(Error::InvalidEdge {
                    index,
                    i,
                    j,
                    reason: "duplicate edge",
                });
            }
            normalized.push(e);
        }
        Ok(Self {
            nodes,
            edges: normalized,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Indices of degree-0 nodes.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn segment(&self, edge: usize) -> (Point3, Point3) {
        let (i, j) = self.edges[edge];
        (self.nodes[i], self.nodes[j])
    }

    pub fn total_length(&self) -> f64 {
        (0..self.edges.len())
            .map(|e| {
                let (a, b) = self.segment(e);
                geom::dist(a, b)
            })
            .sum()
    }

    /// Component label for every node, numbered by first appearance.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut ds = DisjointSet::new(self.nodes.len());
        for &(i, j) in &self.edges {
            ds.union(i, j);
        }
        ds.labels()
    }

    /// Applies `f` to every coordinate, keeping the edge set.
    pub fn map_nodes(&self, mut f: impl FnMut(Point3) -> Point3) -> Result<Self> {
        Self::new(self.nodes.iter().map(|&p| f(p)).collect(), self.edges.clone())
    }

    /// Keeps the nodes for which `keep` is true, with order-preserving
    /// reindexing. Edges touching a dropped node are removed.
    pub fn retain_nodes(&self, keep: &[bool]) -> Self {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, p) in self.nodes.iter().enumerate() {
            if keep[i] {
                remap[i] = nodes.len();
                nodes.push(*p);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(i, j)| keep[i] && keep[j])
            .map(|&(i, j)| (remap[i], remap[j]))
            .collect();
        Self { nodes, edges }
    }

    /// Disjoint union; indices of `other` are shifted past `self`'s nodes.
    pub fn union(&self, other: &SpatialGraph) -> Self {
        let off = self.nodes.len();
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes);
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(i, j)| (i + off, j + off)));
        Self { nodes, edges }
    }

    /// Largest absolute coordinate component.
    pub fn max_abs(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// Centroid magnitude below which a unit-extent graph counts as centered.
pub const NORMALIZED_CENTROID_TOL: f64 = 1e-12;

/// Centers the graph on its node centroid and scales by the largest absolute
/// coordinate so the extremal component is exactly ±1.
///
/// A graph whose nodes all coincide maps to all zeros. Graphs that already
/// satisfy the output contract are returned unchanged, which makes the map
/// idempotent bit-for-bit.
pub fn normalize_graph(graph: &SpatialGraph) -> Result<SpatialGraph> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let c = geom::centroid(graph.nodes());
    if graph.max_abs() == 1.0 && c.iter().all(|v| v.abs() <= NORMALIZED_CENTROID_TOL) {
        return Ok(graph.clone());
    }
    let centered: Vec<Point3> = graph.nodes().iter().map(|&p| geom::sub(p, c)).collect();
    let max_abs = centered
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let nodes = if max_abs == 0.0 {
        vec![[0.0; 3]; centered.len()]
    } else {
        centered
            .into_iter()
            .map(|p| [p[0] / max_abs, p[1] / max_abs, p[2] / max_abs])
            .collect()
    };
    SpatialGraph::new(nodes, graph.edges().to_vec())
}

/// Betti numbers of the graph as a 1-complex: components via union-find and
/// the cycle rank `|E| - |V| + beta0`.
pub fn betti_numbers(graph: &SpatialGraph) -> BettiPair {
    let mut ds = DisjointSet::new(graph.node_count());
    for &(i, j) in graph.edges() {
        ds.union(i, j);
    }
    let beta0 = ds.set_count();
    BettiPair {
        beta0,
        beta1: graph.edge_count() + beta0 - graph.node_count(),
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<Point3>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<SpatialGraph> {
    load_graph_with_meta(path).map(|(g, _)| g)
}

/// Loads a graph and its optional free-form `meta` object.
pub fn load_graph_with_meta(
    path: impl AsRef<Path>,
) -> Result<(SpatialGraph, Option<serde_json::Value>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: GraphFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let edges = file.edges.iter().map(|e| (e[0], e[1])).collect();
    Ok((SpatialGraph::new(file.nodes, edges)?, file.meta))
}

pub fn save_graph(graph: &SpatialGraph, path: impl AsRef<Path>) -> Result<()> {
    save_graph_with_meta(graph, None, path)
}

pub fn save_graph_with_meta(
    graph: &SpatialGraph,
    meta: Option<serde_json::Value>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = GraphFile {
        nodes: graph.nodes.clone(),
        edges: graph.edges.iter().map(|&(i, j)| [i, j]).collect(),
        meta,
    };
    let text = serde_json::to_string(&file).expect("graph serialization is infallible");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
