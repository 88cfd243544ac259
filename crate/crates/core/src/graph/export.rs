use std::collections::HashMap;
use std::fmt::Write;

use super::finite::FiniteGraph;
use super::vertex::{path_edges, EdgeId, VertexId};

const PALETTE: [&str; 8] = [
    "red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan",
];

/// Paths drawn in colour on top of a DOT export, one colour per path.
#[derive(Debug, Clone, Default)]
pub struct DotOverlay {
    pub paths: Vec<Vec<VertexId>>,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT rendering with vertices and edges in sorted order.
pub fn to_dot(fg: &FiniteGraph, name: &str, overlay: Option<&DotOverlay>) -> String {
    let mut colour: HashMap<EdgeId, usize> = HashMap::new();
    if let Some(o) = overlay {
        for (i, p) in o.paths.iter().enumerate() {
            for e in path_edges(p) {
                colour.entry(e).or_insert(i);
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", quote(name));
    for v in fg.vertices() {
        let _ = writeln!(out, "  {};", quote(v.as_str()));
    }
    for e in fg.edges() {
        let (u, v) = e.endpoints();
        match colour.get(&e) {
            Some(&i) => {
                let _ = writeln!(
                    out,
                    "  {} -- {} [color={}, penwidth=2, label=\"{i}\"];",
                    quote(u.as_str()),
                    quote(v.as_str()),
                    PALETTE[i % PALETTE.len()]
                );
            }
            None => {
                let _ = writeln!(out, "  {} -- {};", quote(u.as_str()), quote(v.as_str()));
            }
        }
    }
    out.push_str("}\n");
    out
}
