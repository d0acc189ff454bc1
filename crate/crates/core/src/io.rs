//! Edge-list text format.
//!
//! One undirected edge per line as two whitespace-separated node indices.
//! Blank lines and lines starting with `#` are skipped, except that a
//! comment of the form `# nodes: N` declares the node count when the caller
//! does not supply one. Duplicate edges (in either orientation) collapse;
//! self-loops are rejected.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sbm::Graph;

/// Zachary's karate club network: 34 members, 78 friendships, 1-indexed.
pub const KARATE_EDGE_LIST: &str = include_str!("../data/karate.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Node indices in the file start at 1.
    pub one_indexed: bool,
    /// Declared node count. When `None`, a `# nodes: N` header is honored,
    /// otherwise the count is one past the largest index seen.
    pub nodes: Option<usize>,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        Self {
            one_indexed: true,
            nodes: None,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn header_nodes(comment: &str) -> Option<usize> {
    let rest = comment.trim_start_matches('#').trim();
    let value = rest.strip_prefix("nodes:")?;
    value.trim().parse().ok()
}

pub fn load_edge_list<R: BufRead>(source: R, opts: &EdgeListOptions) -> Result<Graph> {
    let mut declared = opts.nodes;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if opts.nodes.is_none() {
                if let Some(n) = header_nodes(trimmed) {
                    declared = Some(n);
                }
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(parse_err(lineno, "expected exactly two node indices"));
        };
        let parse = |t: &str| -> Result<usize> {
            let v: usize = t
                .parse()
                .map_err(|_| parse_err(lineno, format!("'{t}' is not a non-negative integer")))?;
            if opts.one_indexed {
                v.checked_sub(1)
                    .ok_or_else(|| parse_err(lineno, "index 0 in a 1-indexed edge list"))
            } else {
                Ok(v)
            }
        };
        let (i, j) = (parse(a)?, parse(b)?);
        if i == j {
            return Err(parse_err(lineno, format!("self-loop on node {a}")));
        }
        edges.push((i, j));
    }

    let max_seen = edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0);
    let n = declared.unwrap_or(max_seen);
    let base = usize::from(opts.one_indexed);
    let mut g = Graph::empty(n);
    for (pos, (i, j)) in edges.into_iter().enumerate() {
        if i >= n || j >= n {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "edge {} ({} {}) refers to a node beyond the declared count {n}",
                    pos + 1,
                    i + base,
                    j + base
                ),
            });
        }
        g.add_edge(i, j)?;
    }
    Ok(g)
}

/// Writes `graph` in the same format, with a `# nodes: N` header so isolated
/// trailing nodes survive a round trip.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W, one_indexed: bool) -> Result<()> {
    let base = usize::from(one_indexed);
    writeln!(out, "# nodes: {}", graph.n())?;
    for (i, j) in graph.edges() {
        writeln!(out, "{} {}", i + base, j + base)?;
    }
    Ok(())
}

/// The karate club graph shipped with the crate.
pub fn karate_club() -> Graph {
    load_edge_list(KARATE_EDGE_LIST.as_bytes(), &EdgeListOptions::default())
        .expect("embedded karate edge list is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, one_indexed: bool, nodes: Option<usize>) -> Result<Graph> {
        load_edge_list(text.as_bytes(), &EdgeListOptions { one_indexed, nodes })
    }

    #[test]
    fn empty_stream_with_declared_nodes() {
        let g = load("", true, Some(3)).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn reversed_duplicate_collapses() {
        let g = load("1 2\n2 1\n", true, None).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn zero_indexed_and_comments() {
        let g = load("# a comment\n\n0 1\n  1 2  \n", false, None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            load("1 x\n", true, None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load("1 2\n3 3\n", true, None),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            load("1 2 3\n", true, None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            load("0 1\n", true, None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            load("1 4\n", true, Some(3)),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            load("-1 2\n", false, None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn karate_shape() {
        let g = karate_club();
        assert_eq!(g.n(), 34);
        assert_eq!(g.edge_count(), 78);
        assert_eq!(g.degree(33), 17);
        assert_eq!(g.degree(0), 16);
    }

    #[test]
    fn write_then_load_keeps_isolated_nodes() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2)]).unwrap();
        for one in [true, false] {
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf, one).unwrap();
            let back = load_edge_list(
                buf.as_slice(),
                &EdgeListOptions {
                    one_indexed: one,
                    nodes: None,
                },
            )
            .unwrap();
            assert_eq!(back, g);
        }
    }
}
