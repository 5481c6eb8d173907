//! Plain-text graph dumps for debugging and figures.

use std::io::Write;

use super::{EdgeKind, GraphNode, NodeId};
use crate::error::{Error, Result};

fn io_err(e: std::io::Error) -> Error {
    Error::io("<graph dump>", e)
}

/// `node_u node_v kind multiplicity`, one edge per line.
pub fn write_edge_list<W: Write>(
    edges: impl IntoIterator<Item = (NodeId, NodeId, EdgeKind, u32)>,
    mut out: W,
) -> Result<()> {
    for (u, v, kind, m) in edges {
        writeln!(out, "{u} {v} {} {m}", kind.as_str()).map_err(io_err)?;
    }
    Ok(())
}

/// `node_id time_indices values tickers`; list columns are comma-joined.
pub fn write_node_table<W: Write>(nodes: &[GraphNode], mut out: W) -> Result<()> {
    for n in nodes {
        let join = |items: Vec<String>| items.join(",");
        writeln!(
            out,
            "{} {} {} {}",
            n.node_id,
            join(n.time_indices.iter().map(|t| t.to_string()).collect()),
            join(n.values.iter().map(|v| format!("{v}")).collect()),
            join(n.ticker_tags.clone()),
        )
        .map_err(io_err)?;
    }
    Ok(())
}
