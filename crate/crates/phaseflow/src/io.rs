//! Edge-list text format: one `i j w` triple per line with 0-based vertex
//! indices and a positive weight. `#` starts a comment. Each unordered pair
//! may appear once; the vertex count is one more than the largest index.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Parses an edge list into a graph with degree exponent `r`.
pub fn parse_edge_list(text: &str, r: f64) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: k + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad("expected three fields `i j w`"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| bad("vertex index is not a nonnegative integer"))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| bad("vertex index is not a nonnegative integer"))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| bad("weight is not a number"))?;
        if !(w.is_finite() && w > 0.0) {
            return Err(bad("weight must be positive"));
        }
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, w));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::from_edges(n, &edges, r)
}

/// Writes `i j w` lines for `i < j`, preceded by a comment with the vertex count.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("# vertices: {}\n", g.n_vertices());
    for (i, j, w) in g.edges() {
        writeln!(out, "{i} {j} {w:?}").expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let g = Graph::from_edges(3, &[(0, 1, 0.1), (1, 2, 2.5)], 0.0).unwrap();
        let back = parse_edge_list(&write_edge_list(&g), 0.0).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_edge_list("# header\n0 1 1\n\n1 2 2 # trailing\n", 1.0).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.weight(2, 1), 2.0);
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(matches!(
            parse_edge_list("0 1 1\n1 0 1\n", 0.0),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1\n", 0.0),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 x\n", 0.0),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 -2\n", 0.0),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_edge_list("# nothing\n", 0.0),
            Err(Error::EmptyGraph)
        ));
    }
}
