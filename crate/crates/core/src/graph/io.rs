//! Line-based text format for colored graphs.
//!
//! ```text
//! # comment
//! vocab P Q
//! nodes 4
//! edge 0 1
//! color P 3
//! ```
//!
//! `vocab` and `nodes` must precede `edge` and `color` lines. The writer emits
//! a canonical form: edges as `u < v` ascending, colors in vocabulary order.

use super::{ColoredGraph, Vocabulary};
use crate::error::{Error, Result};
use std::fmt::Write as _;

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_graph(text: &str) -> Result<ColoredGraph> {
    let mut vocab: Option<Vocabulary> = None;
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut colors: Vec<(String, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content
            .split_whitespace()
            .map(|w| (w, w.as_ptr() as usize - raw.as_ptr() as usize + 1));
        let Some((keyword, col)) = words.next() else {
            continue;
        };
        let rest: Vec<(&str, usize)> = words.collect();
        let number = |(w, c): (&str, usize)| -> Result<usize> {
            w.parse()
                .map_err(|_| parse_error(line_no, c, format!("expected a vertex id, found `{w}`")))
        };
        match keyword {
            "vocab" => {
                if vocab.is_some() {
                    return Err(parse_error(line_no, col, "duplicate `vocab` line"));
                }
                vocab = Some(
                    Vocabulary::new(rest.iter().map(|(w, _)| w.to_string()))
                        .map_err(|e| parse_error(line_no, col, e.to_string()))?,
                );
            }
            "nodes" => {
                if n.is_some() {
                    return Err(parse_error(line_no, col, "duplicate `nodes` line"));
                }
                let [arg] = rest[..] else {
                    return Err(parse_error(line_no, col, "`nodes` takes one argument"));
                };
                n = Some(number(arg)?);
            }
            "edge" => {
                if n.is_none() {
                    return Err(parse_error(line_no, col, "`edge` before `nodes`"));
                }
                let [a, b] = rest[..] else {
                    return Err(parse_error(line_no, col, "`edge` takes two vertex ids"));
                };
                edges.push((number(a)?, number(b)?, line_no));
            }
            "color" => {
                if n.is_none() {
                    return Err(parse_error(line_no, col, "`color` before `nodes`"));
                }
                let [(name, _), v] = rest[..] else {
                    return Err(parse_error(line_no, col, "`color` takes a name and a vertex id"));
                };
                colors.push((name.to_string(), number(v)?, line_no));
            }
            other => {
                return Err(parse_error(line_no, col, format!("unknown directive `{other}`")));
            }
        }
    }

    let n = n.ok_or_else(|| parse_error(1, 1, "missing `nodes` line"))?;
    let mut graph = ColoredGraph::edgeless(vocab.unwrap_or_default(), n);
    for (u, v, line_no) in edges {
        graph
            .insert_edge(u, v)
            .map_err(|e| parse_error(line_no, 1, e.to_string()))?;
    }
    for (name, v, line_no) in colors {
        let c = graph
            .vocabulary()
            .index_of(&name)
            .ok_or_else(|| parse_error(line_no, 1, format!("unknown color `{name}`")))?;
        graph
            .insert_color(c, v)
            .map_err(|e| parse_error(line_no, 1, e.to_string()))?;
    }
    graph.normalize();
    Ok(graph)
}

pub fn write_graph(graph: &ColoredGraph) -> String {
    let mut out = String::new();
    out.push_str("vocab");
    for name in graph.vocabulary().names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    let _ = writeln!(out, "nodes {}", graph.n());
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "edge {u} {v}");
    }
    for (name, members) in graph.color_table() {
        for v in members {
            let _ = writeln!(out, "color {name} {v}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let text = "vocab P Q\nnodes 4\nedge 0 1\nedge 1 3\ncolor P 0\ncolor P 2\ncolor Q 3\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(write_graph(&g), text);
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn comments_and_normalization() {
        let text = "# a path\nvocab\nnodes 3 # three\nedge 1 0\nedge 0 1\nedge 2 1\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(write_graph(&g), "vocab\nnodes 3\nedge 0 1\nedge 1 2\n");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_graph("nodes 2\nedge 0 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_graph("vocab P\nnodes 2\ncolor Q 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_graph("nodes 2\nedge 1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_graph("edge 0 1\n").is_err());
        assert!(parse_graph("vocab P\n").is_err());
    }
}
