//! Plain-text graph format.
//!
//! ```text
//! # center 12
//! # frontier 0 1 2
//! n m
//! u v w
//! ...
//! ```
//!
//! Ids are 0-based, anything after `#` is a comment. The `# center` and
//! `# frontier` directives are optional metadata; readers that treat them as
//! plain comments still get the same graph.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::graph::{Fixture, Vertex, VertexSet, WeightedGraph};

pub fn parse_graph(text: &str) -> Result<Fixture> {
    let mut center = None;
    let mut frontier = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let perr = |msg: String| LabError::Parse { line: line_no, msg };
        let (body, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(raw[p + 1..].trim())),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let mut words = c.split_whitespace();
            match words.next() {
                Some("center") => {
                    let v = words.next().ok_or_else(|| perr("center directive without id".into()))?;
                    center = Some(v.parse::<Vertex>().map_err(|e| perr(e.to_string()))?);
                }
                Some("frontier") => {
                    for w in words {
                        frontier.push(w.parse::<Vertex>().map_err(|e| perr(e.to_string()))?);
                    }
                }
                _ => {}
            }
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(perr(format!("expected `n m`, got {} fields", fields.len())));
                }
                let n = fields[0].parse().map_err(|e| perr(format!("vertex count: {e}")))?;
                let m = fields[1].parse().map_err(|e| perr(format!("edge count: {e}")))?;
                header = Some((n, m));
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(perr(format!("expected `u v w`, got {} fields", fields.len())));
                }
                let u = fields[0].parse().map_err(|e| perr(format!("endpoint: {e}")))?;
                let v = fields[1].parse().map_err(|e| perr(format!("endpoint: {e}")))?;
                let w: f64 = fields[2].parse().map_err(|e| perr(format!("weight: {e}")))?;
                edges.push((u, v, w));
            }
        }
    }

    let (n, m) = header.ok_or(LabError::Parse {
        line: 0,
        msg: "missing `n m` header".into(),
    })?;
    if edges.len() != m {
        return Err(LabError::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    let graph = WeightedGraph::new(n, edges)?.with_frontier(VertexSet::new(n, frontier)?)?;
    if let Some(c) = center {
        graph.check_vertex(c)?;
    }
    Ok(Fixture {
        graph,
        center,
        label: String::new(),
    })
}

/// Canonical serialization: directives, header, then edges sorted by `(min, max)`.
pub fn format_graph(graph: &WeightedGraph, center: Option<Vertex>) -> String {
    let mut out = String::new();
    if let Some(c) = center {
        let _ = writeln!(out, "# center {c}");
    }
    if !graph.frontier().is_empty() {
        out.push_str("# frontier");
        for v in graph.frontier().iter() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "{} {}", graph.vertex_count(), graph.edge_count());
    for &(u, v, w) in graph.edges() {
        let _ = writeln!(out, "{u} {v} {w}");
    }
    out
}

pub fn read_graph(path: &Path) -> Result<Fixture> {
    let text = std::fs::read_to_string(path)?;
    let mut fx = parse_graph(&text)?;
    fx.label = path.display().to_string();
    Ok(fx)
}

pub fn write_graph(path: &Path, graph: &WeightedGraph, center: Option<Vertex>) -> Result<()> {
    std::fs::write(path, format_graph(graph, center))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_directives() {
        let text = "# a path\n# center 1\n# frontier 0 2\n3 2\n0 1 1.5 # first\n1 2 2\n";
        let fx = parse_graph(text).unwrap();
        assert_eq!(fx.center, Some(1));
        assert_eq!(fx.graph.frontier().as_slice(), &[0, 2]);
        assert_eq!(fx.graph.mu(1), 3.5);
    }

    #[test]
    fn canonical_round_trip_is_byte_stable() {
        let text = "3 3\n2 1 0.25\n0 1 1\n0 2 3.5\n";
        let fx = parse_graph(text).unwrap();
        let canon = format_graph(&fx.graph, None);
        assert_eq!(canon, "3 3\n0 1 1\n0 2 3.5\n1 2 0.25\n");
        let again = parse_graph(&canon).unwrap();
        assert_eq!(format_graph(&again.graph, None), canon);
    }

    #[test]
    fn reports_bad_lines() {
        assert!(matches!(
            parse_graph("2 1\n0 1\n"),
            Err(LabError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_graph("2 2\n0 1 1\n"), Err(LabError::Parse { .. })));
        assert!(matches!(parse_graph(""), Err(LabError::Parse { .. })));
        assert!(matches!(
            parse_graph("3 1\n0 1 1\n"),
            Err(LabError::Disconnected { .. })
        ));
    }
}
