//! Plain-text edge lists.
//!
//! One edge per line, `u v` for `u -> v` or `u v w` with weight `w > 0`.
//! Blank lines and lines starting with `#` are skipped. An optional header
//! line `n <count>` fixes the vertex count (to keep isolated vertices);
//! otherwise it is one more than the largest index. Indices are 0-based
//! unless `one_based` is set. Repeated edges collapse to one (for weights,
//! the last occurrence wins).

use std::fmt::Write as _;

use nilmas_core::{BoolMatrix, GraphError, IndexSet, WeightedMatrix};
use thiserror::Error;

/// Indices at or above this are rejected before any allocation.
pub const MAX_VERTICES: usize = 1 << 24;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: expected `u v` or `u v w`, got `{content}`")]
    Malformed { line: usize, content: String },
    #[error("line {line}: weight {weight} must be finite and positive")]
    BadWeight { line: usize, weight: f64 },
    #[error("line {line}: vertex {index} out of range for {n} vertices")]
    IndexOverflow { line: usize, index: usize, n: usize },
    #[error("line {line}: index 0 in a one-based file")]
    ZeroInOneBased { line: usize },
    #[error("line {line}: mixes weighted and unweighted edges")]
    MixedWeights { line: usize },
    #[error("line {line}: duplicate or misplaced `n` header")]
    Header { line: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedGraph {
    Unweighted(BoolMatrix),
    Weighted(WeightedMatrix),
}

impl ParsedGraph {
    pub fn pattern(&self) -> BoolMatrix {
        match self {
            ParsedGraph::Unweighted(m) => m.clone(),
            ParsedGraph::Weighted(w) => w.pattern(),
        }
    }

    /// Weights as given, or unit weights for an unweighted file.
    pub fn weights(&self) -> WeightedMatrix {
        match self {
            ParsedGraph::Unweighted(m) => WeightedMatrix::unit(m),
            ParsedGraph::Weighted(w) => w.clone(),
        }
    }
}

struct Line<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

fn content_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(Line {
            number: k + 1,
            fields: trimmed.split_whitespace().collect(),
        })
    })
}

/// Splits off a leading `n <count>` header.
fn header_and_body(text: &str) -> Result<(Option<usize>, Vec<Line<'_>>), ParseError> {
    let mut n = None;
    let mut body = Vec::new();
    for line in content_lines(text) {
        if line.fields[0] == "n" {
            if n.is_some() || !body.is_empty() || line.fields.len() != 2 {
                return Err(ParseError::Header { line: line.number });
            }
            let count = parse_index(&line, line.fields[1], false)?;
            n = Some(count);
        } else {
            body.push(line);
        }
    }
    Ok((n, body))
}

fn malformed(line: &Line<'_>) -> ParseError {
    ParseError::Malformed {
        line: line.number,
        content: line.fields.join(" "),
    }
}

fn parse_index(line: &Line<'_>, field: &str, one_based: bool) -> Result<usize, ParseError> {
    let raw: usize = field.parse().map_err(|_| malformed(line))?;
    let index = if one_based {
        raw.checked_sub(1)
            .ok_or(ParseError::ZeroInOneBased { line: line.number })?
    } else {
        raw
    };
    if index >= MAX_VERTICES {
        return Err(ParseError::IndexOverflow {
            line: line.number,
            index,
            n: MAX_VERTICES,
        });
    }
    Ok(index)
}

fn vertex_count(
    header: Option<usize>,
    edges: &[(usize, usize, usize)],
) -> Result<usize, ParseError> {
    match header {
        Some(n) => {
            if let Some(&(line, index, _)) = edges.iter().find(|e| e.1 >= n) {
                return Err(ParseError::IndexOverflow { line, index, n });
            }
            if let Some(&(line, _, index)) = edges.iter().find(|e| e.2 >= n) {
                return Err(ParseError::IndexOverflow { line, index, n });
            }
            Ok(n)
        }
        None => Ok(edges.iter().map(|e| e.1.max(e.2) + 1).max().unwrap_or(0)),
    }
}

pub fn parse_edge_list(text: &str, one_based: bool) -> Result<ParsedGraph, ParseError> {
    let (header, body) = header_and_body(text)?;
    let weighted = body.first().is_some_and(|l| l.fields.len() == 3);
    let mut edges = Vec::with_capacity(body.len());
    let mut weights = Vec::new();
    for line in &body {
        match (line.fields.len(), weighted) {
            (2, false) | (3, true) => {}
            (2, true) | (3, false) => return Err(ParseError::MixedWeights { line: line.number }),
            _ => return Err(malformed(line)),
        }
        let u = parse_index(line, line.fields[0], one_based)?;
        let v = parse_index(line, line.fields[1], one_based)?;
        edges.push((line.number, u, v));
        if weighted {
            let w: f64 = line.fields[2].parse().map_err(|_| malformed(line))?;
            if !(w.is_finite() && w > 0.0) {
                return Err(ParseError::BadWeight {
                    line: line.number,
                    weight: w,
                });
            }
            weights.push(w);
        }
    }
    let n = vertex_count(header, &edges)?;
    if weighted {
        let triples = edges.iter().zip(weights).map(|(&(_, u, v), w)| (u, v, w));
        Ok(ParsedGraph::Weighted(WeightedMatrix::from_edges(n, triples)?))
    } else {
        let pairs = edges.iter().map(|&(_, u, v)| (u, v));
        Ok(ParsedGraph::Unweighted(BoolMatrix::from_edges(n, pairs)?))
    }
}

/// Canonical text form: header, then edges sorted by source and target.
pub fn write_edge_list(m: &BoolMatrix) -> String {
    let mut edges: Vec<(usize, usize)> = m.edges().collect();
    edges.sort_unstable();
    let mut out = format!("n {}\n", m.n());
    for (u, v) in edges {
        writeln!(out, "{u} {v}").expect("writing to a String");
    }
    out
}

pub fn write_weighted_edge_list(w: &WeightedMatrix) -> String {
    let mut edges: Vec<(usize, usize, f64)> = w.edges().collect();
    edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
    let mut out = format!("n {}\n", w.n());
    for (u, v, wt) in edges {
        writeln!(out, "{u} {v} {wt}").expect("writing to a String");
    }
    out
}

/// Per-vertex budgets, one `v r` line per vertex; vertices not listed get
/// `default`.
pub fn parse_budgets(
    text: &str,
    n: usize,
    default: usize,
    one_based: bool,
) -> Result<Vec<usize>, ParseError> {
    let mut budgets = vec![default; n];
    for line in content_lines(text) {
        if line.fields.len() != 2 {
            return Err(malformed(&line));
        }
        let v = parse_index(&line, line.fields[0], one_based)?;
        if v >= n {
            return Err(ParseError::IndexOverflow {
                line: line.number,
                index: v,
                n,
            });
        }
        budgets[v] = line.fields[1].parse().map_err(|_| malformed(&line))?;
    }
    Ok(budgets)
}

/// Protected edges, in edge-list format, grouped by target vertex: entry `v`
/// holds the sources of protected edges into `v`.
pub fn parse_untouchable(text: &str, n: usize, one_based: bool) -> Result<Vec<IndexSet>, ParseError> {
    let mut sources: Vec<Vec<usize>> = vec![Vec::new(); n];
    for line in content_lines(text) {
        if line.fields[0] == "n" {
            continue;
        }
        if line.fields.len() != 2 {
            return Err(malformed(&line));
        }
        let u = parse_index(&line, line.fields[0], one_based)?;
        let v = parse_index(&line, line.fields[1], one_based)?;
        if let Some(&index) = [u, v].iter().find(|&&x| x >= n) {
            return Err(ParseError::IndexOverflow {
                line: line.number,
                index,
                n,
            });
        }
        sources[v].push(u);
    }
    Ok(sources.into_iter().map(IndexSet::from_indices).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle() {
        let g = parse_edge_list("0 1\n1 2\n2 0\n", false).unwrap();
        assert_eq!(g, ParsedGraph::Unweighted(BoolMatrix::cycle(3)));
    }

    #[test]
    fn duplicates_collapse() {
        let g = parse_edge_list("0 1\n0 1\n", false).unwrap().pattern();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn weighted_edge() {
        match parse_edge_list("0 1 2.5\n", false).unwrap() {
            ParsedGraph::Weighted(w) => assert_eq!(w.weight(1, 0), Some(2.5)),
            other => panic!("expected weights, got {other:?}"),
        }
    }

    #[test]
    fn header_comments_and_one_based() {
        let g = parse_edge_list("# ring\nn 5\n1 2\n\n2 1\n", true).unwrap().pattern();
        assert_eq!(g.n(), 5);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            parse_edge_list("0 1\nzero 1\n", false),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert_eq!(
            parse_edge_list("0 1 -1\n", false),
            Err(ParseError::BadWeight { line: 1, weight: -1.0 })
        );
        assert_eq!(
            parse_edge_list("n 2\n0 3\n", false),
            Err(ParseError::IndexOverflow { line: 2, index: 3, n: 2 })
        );
        assert_eq!(parse_edge_list("0 1\n1 2 3\n", false), Err(ParseError::MixedWeights { line: 2 }));
        assert_eq!(parse_edge_list("0 1\n", true), Err(ParseError::ZeroInOneBased { line: 1 }));
        assert_eq!(parse_edge_list("0 1\nn 3\n", false), Err(ParseError::Header { line: 2 }));
        assert!(matches!(
            parse_edge_list("0 99999999999\n", false),
            Err(ParseError::IndexOverflow { .. })
        ));
    }

    #[test]
    fn canonical_form() {
        let text = "2 0\n0 1\n1 2\n0 1\n";
        let g = parse_edge_list(text, false).unwrap().pattern();
        assert_eq!(write_edge_list(&g), "n 3\n0 1\n1 2\n2 0\n");
    }

    #[test]
    fn budgets_and_protected_edges() {
        assert_eq!(parse_budgets("0 2\n# x\n2 1\n", 3, 0, false).unwrap(), vec![2, 0, 1]);
        assert!(parse_budgets("5 1\n", 3, 0, false).is_err());
        let sets = parse_untouchable("0 1\n2 1\n", 3, false).unwrap();
        assert_eq!(sets[1].as_slice(), &[0, 2]);
        assert!(sets[0].is_empty());
    }
}
