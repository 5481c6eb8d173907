//! Visibility graphs over scaled windows and the cross-ticker multigraph.

mod dump;
mod multigraph;
mod visibility;

use serde::{Deserialize, Serialize};

pub use dump::{write_edge_list, write_node_table};
pub use multigraph::{build_multigraph, MultiGraph, DEFAULT_SIMILAR_VALUE_EPSILON};
pub use visibility::{
    build_hvg, build_nvg, hvg_bruteforce, hvg_edges, nvg_bruteforce, nvg_edges,
    VisibilityGraph, VisibilityKind, WindowSource,
};

pub type NodeId = usize;

/// A graph node. `time_indices`, `values` and `ticker_tags` are parallel
/// lists with one entry per merged constituent; unmerged nodes hold one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub node_id: NodeId,
    pub time_indices: Vec<usize>,
    pub values: Vec<f64>,
    pub ticker_tags: Vec<String>,
}

impl GraphNode {
    pub fn single(node_id: NodeId, time_index: usize, value: f64, ticker: &str) -> Self {
        Self {
            node_id,
            time_indices: vec![time_index],
            values: vec![value],
            ticker_tags: vec![ticker.to_string()],
        }
    }

    pub fn first_time_index(&self) -> usize {
        self.time_indices.iter().copied().min().unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Visibility,
    CoOccurrence,
    SimilarValue,
}

impl EdgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::Visibility => "visibility",
            EdgeKind::CoOccurrence => "co_occurrence",
            EdgeKind::SimilarValue => "similar_value",
        }
    }

    pub fn is_cross_ticker(&self) -> bool {
        !matches!(self, EdgeKind::Visibility)
    }
}

/// Adjacency entry, aggregated over all parallel edges toward `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub node: NodeId,
    /// Total multiplicity over all edge kinds.
    pub multiplicity: u32,
    /// Multiplicity carried by co-occurrence / similar-value edges.
    pub cross_multiplicity: u32,
}

impl Neighbor {
    pub fn has_cross(&self) -> bool {
        self.cross_multiplicity > 0
    }

    pub fn has_within(&self) -> bool {
        self.multiplicity > self.cross_multiplicity
    }
}

/// Read-only view used by the walkers.
pub trait Walkable: Sync {
    fn nodes(&self) -> &[GraphNode];
    /// Neighbors sorted by node id.
    fn neighbors(&self, node: NodeId) -> &[Neighbor];

    fn node_count(&self) -> usize {
        self.nodes().len()
    }

    /// Node holding the smallest time index (ties: lowest id).
    fn first_node(&self) -> NodeId {
        self.nodes()
            .iter()
            .min_by_key(|n| (n.first_time_index(), n.node_id))
            .map(|n| n.node_id)
            .unwrap_or(0)
    }
}

/// Builds sorted adjacency lists from `(u, v, kind) -> multiplicity`.
pub(crate) fn build_adjacency<'a>(
    n: usize,
    edges: impl Iterator<Item = (NodeId, NodeId, EdgeKind, u32)> + 'a,
) -> Vec<Vec<Neighbor>> {
    let mut acc: Vec<std::collections::BTreeMap<NodeId, (u32, u32)>> = vec![Default::default(); n];
    for (u, v, kind, m) in edges {
        let cross = if kind.is_cross_ticker() { m } else { 0 };
        for (a, b) in [(u, v), (v, u)] {
            let e = acc[a].entry(b).or_insert((0, 0));
            e.0 += m;
            e.1 += cross;
        }
    }
    acc.into_iter()
        .map(|m| {
            m.into_iter()
                .map(|(node, (multiplicity, cross_multiplicity))| Neighbor {
                    node,
                    multiplicity,
                    cross_multiplicity,
                })
                .collect()
        })
        .collect()
}
