use std::io::Write;

use super::{Graph, GraphError};

pub const EDGE_LIST_MAX_VERTICES: usize = 10_000;

/// Writes `n m` followed by one `u v` line per edge, `u < v`, sorted.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> Result<(), GraphError> {
    if graph.n() > EDGE_LIST_MAX_VERTICES {
        return Err(GraphError::ExportTooLarge {
            n: graph.n(),
            limit: EDGE_LIST_MAX_VERTICES,
        });
    }
    let edges = graph.edges();
    writeln!(out, "{} {}", graph.n(), edges.len())?;
    for (u, v) in edges {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
