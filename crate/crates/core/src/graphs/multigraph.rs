use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{build_adjacency, nvg_edges, EdgeKind, GraphNode, Neighbor, NodeId, Walkable};
use crate::error::{Error, Result};
use crate::ingest::{MinMax, SegmentKey, Window};

pub const DEFAULT_SIMILAR_VALUE_EPSILON: f64 = 0.01;

/// Composite graph over all tickers of one time segment.
#[derive(Debug, Clone)]
pub struct MultiGraph {
    pub segment: SegmentKey,
    /// Tickers in canonical (sorted) order.
    pub tickers: Vec<String>,
    pub per_ticker: BTreeMap<String, BTreeSet<NodeId>>,
    pub nodes: Vec<GraphNode>,
    pub edges: BTreeMap<(NodeId, NodeId, EdgeKind), u32>,
    pub merge_map: BTreeMap<(String, usize), NodeId>,
    pub scales: BTreeMap<String, MinMax>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl MultiGraph {
    pub fn node_of(&self, ticker: &str, time_index: usize) -> Option<NodeId> {
        self.merge_map.get(&(ticker.to_string(), time_index)).copied()
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = ((NodeId, NodeId), u32)> + '_ {
        self.edges
            .iter()
            .filter(move |((_, _, k), _)| *k == kind)
            .map(|(&(u, v, _), &m)| ((u, v), m))
    }

    pub fn multiplicity(&self, u: NodeId, v: NodeId, kind: EdgeKind) -> u32 {
        self.edges
            .get(&(u.min(v), u.max(v), kind))
            .copied()
            .unwrap_or(0)
    }
}

impl Walkable for MultiGraph {
    fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    fn neighbors(&self, node: NodeId) -> &[Neighbor] {
        &self.adjacency[node]
    }
}

/// Scaled values can only be equal if their bit patterns are (after folding
/// -0.0 into 0.0).
fn value_key(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Builds the multigraph of one segment:
///
/// 1. an NVG per ticker window,
/// 2. co-occurrence edges between every pair of tickers at each time index,
/// 3. similar-value edges between nodes of different tickers whose scaled
///    values differ by less than `epsilon`,
/// 4. nodes sharing a time index and an exactly equal scaled value merged,
///    with parallel edges accumulating multiplicity and self-loops dropped.
pub fn build_multigraph(windows: &[Window], epsilon: f64) -> Result<MultiGraph> {
    let first = windows
        .first()
        .ok_or_else(|| Error::InvalidInput("multigraph needs at least one window".into()))?;
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidConfig(format!("similar-value epsilon {epsilon} < 0")));
    }
    let segment = first.segment();
    if segment.length < 2 {
        return Err(Error::InvalidWindow(format!("window length {} < 2", segment.length)));
    }
    let mut ordered: Vec<&Window> = windows.iter().collect();
    ordered.sort_by(|a, b| a.ticker.cmp(&b.ticker));
    for w in &ordered {
        if w.segment() != segment {
            return Err(Error::SegmentMismatch(format!(
                "{} covers {} but segment is {}",
                w.ticker,
                w.segment(),
                segment
            )));
        }
        if w.scaled.is_none() {
            return Err(Error::InvalidWindow(format!("{} is not scaled", w.ticker)));
        }
    }
    if let Some(pair) = ordered.windows(2).find(|p| p[0].ticker == p[1].ticker) {
        return Err(Error::InvalidInput(format!(
            "ticker {} appears twice in one segment",
            pair[0].ticker
        )));
    }

    let len = segment.length;
    let n_tickers = ordered.len();
    let value = |t: usize, i: usize| ordered[t].scaled_values().unwrap()[i];
    let provisional = |t: usize, i: usize| t * len + i;

    // Merge identical (time, value) nodes; ids follow the first constituent.
    let mut rep_of = vec![0usize; n_tickers * len];
    for i in 0..len {
        let mut seen: HashMap<u64, usize> = HashMap::new();
        for t in 0..n_tickers {
            let p = provisional(t, i);
            rep_of[p] = *seen.entry(value_key(value(t, i))).or_insert(p);
        }
    }
    let mut final_of_rep: HashMap<usize, NodeId> = HashMap::new();
    let mut node_of = vec![0; n_tickers * len];
    let mut nodes: Vec<GraphNode> = Vec::new();
    for t in 0..n_tickers {
        for i in 0..len {
            let p = provisional(t, i);
            let id = *final_of_rep.entry(rep_of[p]).or_insert_with(|| {
                nodes.push(GraphNode {
                    node_id: nodes.len(),
                    time_indices: Vec::new(),
                    values: Vec::new(),
                    ticker_tags: Vec::new(),
                });
                nodes.len() - 1
            });
            node_of[p] = id;
            let node = &mut nodes[id];
            node.time_indices.push(i);
            node.values.push(value(t, i));
            node.ticker_tags.push(ordered[t].ticker.clone());
        }
    }

    let mut edges: BTreeMap<(NodeId, NodeId, EdgeKind), u32> = BTreeMap::new();
    let mut add = |a: usize, b: usize, kind: EdgeKind| {
        let (u, v) = (node_of[a], node_of[b]);
        if u != v {
            *edges.entry((u.min(v), u.max(v), kind)).or_insert(0) += 1;
        }
    };

    for (t, w) in ordered.iter().enumerate() {
        for (i, j) in nvg_edges(w.scaled_values().unwrap()) {
            add(provisional(t, i), provisional(t, j), EdgeKind::Visibility);
        }
    }
    for i in 0..len {
        for a in 0..n_tickers {
            for b in a + 1..n_tickers {
                add(provisional(a, i), provisional(b, i), EdgeKind::CoOccurrence);
            }
        }
    }
    if n_tickers > 1 {
        // sweep over value-sorted provisional nodes
        let mut by_value: Vec<(f64, usize)> = (0..n_tickers)
            .flat_map(|t| (0..len).map(move |i| (t, i)))
            .map(|(t, i)| (value(t, i), provisional(t, i)))
            .collect();
        by_value.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for x in 0..by_value.len() {
            let (va, pa) = by_value[x];
            for &(vb, pb) in &by_value[x + 1..] {
                if vb - va >= epsilon {
                    break;
                }
                if pa / len != pb / len {
                    add(pa.min(pb), pa.max(pb), EdgeKind::SimilarValue);
                }
            }
        }
    }

    let mut per_ticker: BTreeMap<String, BTreeSet<NodeId>> = BTreeMap::new();
    let mut merge_map = BTreeMap::new();
    let mut scales = BTreeMap::new();
    for (t, w) in ordered.iter().enumerate() {
        let set = per_ticker.entry(w.ticker.clone()).or_default();
        for i in 0..len {
            let id = node_of[provisional(t, i)];
            set.insert(id);
            merge_map.insert((w.ticker.clone(), i), id);
        }
        scales.insert(w.ticker.clone(), w.bounds().unwrap());
    }

    let adjacency = build_adjacency(
        nodes.len(),
        edges.iter().map(|(&(u, v, k), &m)| (u, v, k, m)),
    );
    Ok(MultiGraph {
        segment,
        tickers: ordered.iter().map(|w| w.ticker.clone()).collect(),
        per_ticker,
        nodes,
        edges,
        merge_map,
        scales,
        adjacency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::build_nvg;
    use rand::Rng;

    fn win(ticker: &str, raw: &[f64]) -> Window {
        Window::scaled_from_raw(ticker, 0, raw.to_vec())
    }

    #[test]
    fn single_ticker_equals_its_nvg() {
        let w = win("A", &[3.0, 1.0, 2.0, 5.0, 4.0]);
        let mg = build_multigraph(std::slice::from_ref(&w), 0.01).unwrap();
        let nvg = build_nvg(&w).unwrap();
        assert_eq!(mg.nodes, nvg.nodes);
        let vis: BTreeMap<_, _> = mg.edges_of_kind(EdgeKind::Visibility).collect();
        assert_eq!(vis, nvg.edges);
        assert_eq!(mg.edges.len(), nvg.edges.len());
    }

    #[test]
    fn identical_tickers_merge_fully() {
        let mg = build_multigraph(&[win("A", &[1.0, 2.0]), win("B", &[1.0, 2.0])], 0.01).unwrap();
        assert_eq!(mg.nodes.len(), 2);
        assert_eq!(mg.nodes[0].values, vec![0.0, 0.0]);
        assert_eq!(mg.nodes[0].ticker_tags, vec!["A", "B"]);
        assert_eq!(mg.multiplicity(0, 1, EdgeKind::Visibility), 2);
        assert_eq!(mg.edges.len(), 1);
        assert_eq!(mg.neighbors(0)[0].multiplicity, 2);
    }

    #[test]
    fn similar_value_link() {
        let mut a = win("A", &[0.0, 1.0]);
        let mut b = win("B", &[0.0, 1.0]);
        a.scaled.as_mut().unwrap().values = vec![0.0, 1.0];
        b.scaled.as_mut().unwrap().values = vec![0.999, 0.5];
        let mg = build_multigraph(&[a, b], 0.01).unwrap();
        let a1 = mg.node_of("A", 1).unwrap();
        let b0 = mg.node_of("B", 0).unwrap();
        assert_eq!(mg.multiplicity(a1, b0, EdgeKind::SimilarValue), 1);
        assert_eq!(mg.edges_of_kind(EdgeKind::SimilarValue).count(), 1);
        assert_eq!(mg.edges_of_kind(EdgeKind::CoOccurrence).count(), 2);
    }

    #[test]
    fn segment_mismatch_is_rejected() {
        let a = win("A", &[1.0, 2.0, 3.0]);
        let b = Window::scaled_from_raw("B", 3, vec![1.0, 2.0, 3.0]);
        assert!(matches!(build_multigraph(&[a.clone(), b], 0.01), Err(Error::SegmentMismatch(_))));
        let c = win("C", &[1.0, 2.0]);
        assert!(matches!(build_multigraph(&[a, c], 0.01), Err(Error::SegmentMismatch(_))));
    }

    #[test]
    fn structural_invariants_on_random_segments() {
        let mut rng = crate::seed::rng_from_seed(11);
        for _ in 0..20 {
            let n_t = rng.random_range(1..6);
            let windows: Vec<Window> = (0..n_t)
                .map(|t| {
                    let raw: Vec<f64> = (0..20).map(|_| rng.random_range(0..6) as f64).collect();
                    win(&format!("T{t}"), &raw)
                })
                .collect();
            let mg = build_multigraph(&windows, 0.01).unwrap();

            // conservation of the value multiset
            let mut got: Vec<f64> = mg.nodes.iter().flat_map(|n| n.values.clone()).collect();
            let mut want: Vec<f64> = windows.iter().flat_map(|w| w.scaled_values().unwrap().to_vec()).collect();
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            assert_eq!(got, want);

            for ((u, v, kind), m) in &mg.edges {
                assert!(u < v && *m > 0);
                match kind {
                    EdgeKind::Visibility => assert!(mg
                        .per_ticker
                        .values()
                        .any(|s| s.contains(u) && s.contains(v))),
                    EdgeKind::CoOccurrence => {
                        let shared = mg.nodes[*u]
                            .time_indices
                            .iter()
                            .any(|t| mg.nodes[*v].time_indices.contains(t));
                        assert!(shared);
                    }
                    EdgeKind::SimilarValue => {}
                }
            }
            // consecutive time indices of each ticker stay connected
            for w in &windows {
                for i in 0..19 {
                    let u = mg.node_of(&w.ticker, i).unwrap();
                    let v = mg.node_of(&w.ticker, i + 1).unwrap();
                    assert!(mg.multiplicity(u, v, EdgeKind::Visibility) > 0);
                }
            }
            // determinism, independent of input order
            let mut rev = windows.clone();
            rev.reverse();
            let again = build_multigraph(&rev, 0.01).unwrap();
            assert_eq!(again.nodes, mg.nodes);
            assert_eq!(again.edges, mg.edges);
        }
    }
}
