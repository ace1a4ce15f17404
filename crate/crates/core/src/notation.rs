//! Text forms: twig brackets and the line-oriented DGN graph format.
//!
//! DGN lines:
//!
//! ```text
//! v <id> <weight> [C]        a vertex, optionally the marked curve
//! e <id> <id>                an edge
//! chain <first> <w1> <w2>..  a path on fresh ids first, first+1, ...
//! # ...                      comment, also allowed after a statement
//! ```
//!
//! Weights are signed self-intersections. Edges may mention vertices
//! declared further down.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{DualGraph, GraphError, VertexId};
use crate::twig::Twig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 when the error is not tied to a line.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

fn parse_num<T: FromStr>(line: usize, what: &str, tok: &str) -> Result<T, ParseError> {
    tok.parse()
        .or_else(|_| err(line, format!("invalid {what} '{tok}'")))
}

/// Parses `[a1,...,ar]`, with `k*a` standing for `k` copies of `a`.
pub fn parse_twig(text: &str) -> Result<Twig, ParseError> {
    let s = text.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ParseError {
            line: 0,
            message: format!("twig must be written as [a1,...,ar], got '{s}'"),
        })?;
    let mut weights = Vec::new();
    if inner.trim().is_empty() {
        return Ok(Twig::empty());
    }
    for item in inner.split(',') {
        let item = item.trim();
        let (count, weight) = match item.split_once('*') {
            Some((k, a)) => (parse_num::<usize>(0, "repetition count", k.trim())?, a.trim()),
            None => (1, item),
        };
        if count == 0 {
            return err(0, format!("repetition count must be positive in '{item}'"));
        }
        let a: i64 = parse_num(0, "twig weight", weight)?;
        if a <= 0 {
            return err(0, format!("twig weights must be positive, got {a}"));
        }
        weights.extend(std::iter::repeat_n(a, count));
    }
    Ok(Twig::new(weights))
}

impl FromStr for Twig {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_twig(s)
    }
}

fn graph_err(line: usize, e: GraphError) -> ParseError {
    ParseError {
        line,
        message: e.to_string(),
    }
}

pub fn parse_dgn(text: &str) -> Result<DualGraph, ParseError> {
    let mut g = DualGraph::new();
    let mut edges: Vec<(usize, VertexId, VertexId)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, args)) = toks.split_first() else {
            continue;
        };
        match head {
            "v" => {
                let (id, weight, mark) = match args {
                    [id, w] => (id, w, false),
                    [id, w, "C"] => (id, w, true),
                    _ => return err(line, "expected 'v <id> <weight> [C]'"),
                };
                let id: VertexId = parse_num(line, "vertex id", id)?;
                let weight: i64 = parse_num(line, "weight", weight)?;
                g.add_vertex(id, weight).map_err(|e| graph_err(line, e))?;
                if mark {
                    g.set_mark(id).map_err(|e| graph_err(line, e))?;
                }
            }
            "e" => {
                let [u, v] = args else {
                    return err(line, "expected 'e <id> <id>'");
                };
                edges.push((
                    line,
                    parse_num(line, "vertex id", u)?,
                    parse_num(line, "vertex id", v)?,
                ));
            }
            "chain" => {
                let Some((first, ws)) = args.split_first() else {
                    return err(line, "expected 'chain <first-id> <w1> ...'");
                };
                if ws.is_empty() {
                    return err(line, "a chain needs at least one weight");
                }
                let first: VertexId = parse_num(line, "vertex id", first)?;
                let ws = ws
                    .iter()
                    .map(|w| parse_num(line, "weight", w))
                    .collect::<Result<Vec<i64>, _>>()?;
                g.add_path(first, &ws).map_err(|e| graph_err(line, e))?;
            }
            other => return err(line, format!("unknown statement '{other}'")),
        }
    }
    for (line, u, v) in edges {
        g.add_edge(u, v).map_err(|e| graph_err(line, e))?;
    }
    Ok(g)
}

/// Canonical DGN: vertices by id, then edges in lexicographic order.
pub fn to_dgn(g: &DualGraph) -> String {
    let mut out = String::new();
    for v in g.ids() {
        let w = g.weight(v).expect("listed");
        let mark = if g.mark() == Some(v) { " C" } else { "" };
        writeln!(out, "v {v} {w}{mark}").expect("write to string");
    }
    for (u, v) in g.edges() {
        writeln!(out, "e {u} {v}").expect("write to string");
    }
    out
}

impl std::fmt::Display for DualGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&to_dgn(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twig_syntax() {
        assert_eq!(parse_twig("[2,3]").unwrap().weights(), &[2, 3]);
        assert_eq!(parse_twig("[3*2]").unwrap().weights(), &[2, 2, 2]);
        assert_eq!(parse_twig("[3*2,5]").unwrap().weights(), &[2, 2, 2, 5]);
        assert_eq!(parse_twig(" [ 2 , 4 ] ").unwrap().weights(), &[2, 4]);
        assert!(parse_twig("[]").unwrap().is_empty());
        for bad in ["2,3", "[2,x]", "[0]", "[-2]", "[2.5]", "[0*2]", "[2,,3]", "[2"] {
            assert!(parse_twig(bad).is_err(), "{bad}");
        }
        assert_eq!("[2,3]".parse::<Twig>().unwrap().to_string(), "[2,3]");
    }

    #[test]
    fn dgn_examples() {
        let g = parse_dgn("v 1 0 C\nv 2 -3\ne 1 2").unwrap();
        assert_eq!(g.mark(), Some(1));
        assert_eq!(g.weight(2), Some(-3));
        assert!(g.has_edge(1, 2));

        let g = parse_dgn("chain 1 -2 -1 -2").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.weight(2), Some(-1));
        assert!(g.has_edge(1, 2) && g.has_edge(2, 3) && !g.has_edge(1, 3));
    }

    #[test]
    fn dgn_errors_carry_lines() {
        let e = parse_dgn("v 1 0 C\nv 1 -2").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("already exists"));

        let e = parse_dgn("v 1 -2\n\ne 1 7").unwrap_err();
        assert_eq!(e.line, 3);

        let e = parse_dgn("v 1 -1 C\nv 2 -1 C").unwrap_err();
        assert_eq!(e.line, 2);

        assert_eq!(parse_dgn("x 1").unwrap_err().line, 1);
        assert_eq!(parse_dgn("v 1").unwrap_err().line, 1);
        assert_eq!(parse_dgn("v 1 -2 D").unwrap_err().line, 1);
        assert_eq!(parse_dgn("chain 1").unwrap_err().line, 1);
        assert_eq!(parse_dgn("v 1 -2\ne 1 1").unwrap_err().line, 2);
        assert_eq!(parse_dgn("chain 1 -2 -2\ne 2 1").unwrap_err().line, 2);
    }

    #[test]
    fn comments_and_forward_edges() {
        let g = parse_dgn("# header\ne 1 2 # forward\nv 2 -2\nv 1 -1 C  # marked\n").unwrap();
        assert!(g.has_edge(1, 2));
        assert_eq!(g.mark(), Some(1));
    }

    #[test]
    fn canonical_round_trip() {
        let text = "v 1 -1 C\nv 2 -2\nv 3 -3\ne 1 2\ne 1 3\n";
        let g = parse_dgn(text).unwrap();
        assert_eq!(to_dgn(&g), text);
        let messy = "e 3 1\nv 3 -3\nv 2 -2 # x\nv 1 -1 C\ne 2 1\n";
        assert_eq!(to_dgn(&parse_dgn(messy).unwrap()), text);
        assert_eq!(to_dgn(&DualGraph::new()), "");
    }
}
