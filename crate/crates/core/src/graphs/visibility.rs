use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{build_adjacency, EdgeKind, GraphNode, Neighbor, NodeId, Walkable};
use crate::error::{Error, Result};
use crate::ingest::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityKind {
    Nvg,
    Hvg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSource {
    pub ticker: String,
    pub start_index: usize,
    pub length: usize,
}

/// Visibility graph of a single window. One node per time index.
#[derive(Debug, Clone)]
pub struct VisibilityGraph {
    pub kind: VisibilityKind,
    pub nodes: Vec<GraphNode>,
    pub edges: BTreeMap<(NodeId, NodeId), u32>,
    pub source: WindowSource,
    adjacency: Vec<Vec<Neighbor>>,
}

impl PartialEq for VisibilityGraph {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.source == other.source
    }
}

impl VisibilityGraph {
    /// Assembles a graph from explicit parts. Edge endpoints are normalized
    /// to `(min, max)`; self-loops and dangling ids are rejected.
    pub fn from_parts(
        kind: VisibilityKind,
        nodes: Vec<GraphNode>,
        edges: impl IntoIterator<Item = ((NodeId, NodeId), u32)>,
        source: WindowSource,
    ) -> Result<Self> {
        if let Some((i, n)) = nodes.iter().enumerate().find(|(i, n)| n.node_id != *i) {
            return Err(Error::Integrity(format!(
                "node at position {i} has id {}",
                n.node_id
            )));
        }
        if nodes.iter().any(|n| n.values.is_empty()) {
            return Err(Error::Integrity("node without values".into()));
        }
        let mut map = BTreeMap::new();
        for ((u, v), m) in edges {
            if u == v {
                return Err(Error::Integrity(format!("self-loop on node {u}")));
            }
            if u.max(v) >= nodes.len() {
                return Err(Error::Integrity(format!("edge ({u},{v}) out of range")));
            }
            if m > 0 {
                *map.entry((u.min(v), u.max(v))).or_insert(0) += m;
            }
        }
        let adjacency = build_adjacency(
            nodes.len(),
            map.iter().map(|(&(u, v), &m)| (u, v, EdgeKind::Visibility, m)),
        );
        Ok(Self {
            kind,
            nodes,
            edges: map,
            source,
            adjacency,
        })
    }

    fn from_window(kind: VisibilityKind, window: &Window, edges: Vec<(NodeId, NodeId)>) -> Result<Self> {
        let values = scaled_input(window)?;
        let nodes = values
            .iter()
            .enumerate()
            .map(|(i, &v)| GraphNode::single(i, i, v, &window.ticker))
            .collect();
        Self::from_parts(
            kind,
            nodes,
            edges.into_iter().map(|e| (e, 1)),
            WindowSource {
                ticker: window.ticker.clone(),
                start_index: window.start_index,
                length: window.len(),
            },
        )
    }

    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges.keys().copied().collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

impl Walkable for VisibilityGraph {
    fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    fn neighbors(&self, node: NodeId) -> &[Neighbor] {
        &self.adjacency[node]
    }
}

fn scaled_input(window: &Window) -> Result<&[f64]> {
    let values = window.scaled_values().ok_or_else(|| {
        Error::InvalidWindow(format!(
            "{}@{} is not scaled",
            window.ticker, window.start_index
        ))
    })?;
    if values.len() < 2 {
        return Err(Error::InvalidWindow(format!(
            "window length {} < 2",
            values.len()
        )));
    }
    Ok(values)
}

/// Natural-visibility edge list of `values`, sorted.
///
/// For each left endpoint `i` the running maximum-slope point between `i`
/// and `j` is the only one that can block the sight line, so it is tested
/// with the literal criterion
/// `v[k] < v[i] + (v[j] - v[i]) * (k - i) / (j - i)`; O(n^2) overall.
pub fn nvg_edges(values: &[f64]) -> Vec<(NodeId, NodeId)> {
    let n = values.len();
    let mut edges = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let vi = values[i];
        edges.push((i, i + 1));
        let mut blocker = i + 1;
        let mut blocker_slope = values[i + 1] - vi;
        for j in i + 2..n {
            let vj = values[j];
            let sight = vi + (vj - vi) * (blocker - i) as f64 / (j - i) as f64;
            let vb = values[blocker];
            if vb < sight {
                // Near-collinear: rounding may let another point fail the
                // literal test first, so check them all.
                let slack = 1e-9 * (vi.abs() + vj.abs() + vb.abs() + 1.0);
                if sight - vb > slack || literally_visible(values, i, j) {
                    edges.push((i, j));
                }
            }
            let slope = (vj - vi) / (j - i) as f64;
            if slope > blocker_slope {
                blocker = j;
                blocker_slope = slope;
            }
        }
    }
    edges
}

fn literally_visible(v: &[f64], i: usize, j: usize) -> bool {
    (i + 1..j).all(|k| v[k] < v[i] + (v[j] - v[i]) * (k - i) as f64 / (j - i) as f64)
}

/// Horizontal-visibility edge list of `values`, sorted.
///
/// Scanning right from `i`, nothing past the first `j` with `v[j] >= v[i]`
/// can see `i`, which bounds the inner loop.
pub fn hvg_edges(values: &[f64]) -> Vec<(NodeId, NodeId)> {
    let n = values.len();
    let mut edges = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let vi = values[i];
        edges.push((i, i + 1));
        let mut between_max = values[i + 1];
        if between_max >= vi {
            continue;
        }
        for (j, &vj) in values.iter().enumerate().skip(i + 2) {
            if between_max < vi.min(vj) {
                edges.push((i, j));
            }
            between_max = between_max.max(vj);
            if between_max >= vi {
                break;
            }
        }
    }
    edges
}

/// Natural visibility graph of a scaled window.
pub fn build_nvg(window: &Window) -> Result<VisibilityGraph> {
    let edges = nvg_edges(scaled_input(window)?);
    VisibilityGraph::from_window(VisibilityKind::Nvg, window, edges)
}

/// Horizontal visibility graph of a scaled window.
pub fn build_hvg(window: &Window) -> Result<VisibilityGraph> {
    let edges = hvg_edges(scaled_input(window)?);
    VisibilityGraph::from_window(VisibilityKind::Hvg, window, edges)
}

/// Reference NVG: every pair, every intermediate point, literal criterion.
/// O(n^3); meant for oracle checks.
pub fn nvg_bruteforce(window: &Window) -> Result<VisibilityGraph> {
    let v = scaled_input(window)?;
    let n = v.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let visible = (i + 1..j)
                .all(|k| v[k] < v[i] + (v[j] - v[i]) * (k - i) as f64 / (j - i) as f64);
            if visible {
                edges.push((i, j));
            }
        }
    }
    VisibilityGraph::from_window(VisibilityKind::Nvg, window, edges)
}

/// Reference HVG, O(n^3).
pub fn hvg_bruteforce(window: &Window) -> Result<VisibilityGraph> {
    let v = scaled_input(window)?;
    let n = v.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (i + 1..j).all(|k| v[k] < v[i].min(v[j])) {
                edges.push((i, j));
            }
        }
    }
    VisibilityGraph::from_window(VisibilityKind::Hvg, window, edges)
}
