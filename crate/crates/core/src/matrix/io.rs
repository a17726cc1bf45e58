//! Matrix and graph file formats.
//!
//! * JSON: `{"n": 3, "format": "coo", "entries": [[i, j, value], ...]}`
//! * dense CSV: `n` lines of `n` comma-separated values
//! * graph: whitespace-separated `u v` lines, 0-based, `#` starts a comment

use super::{Graph, InteractionMatrix};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct CooFile {
    n: usize,
    format: String,
    entries: Vec<(usize, usize, f64)>,
}

pub fn to_json(xi: &InteractionMatrix) -> String {
    let file = CooFile { n: xi.n(), format: "coo".into(), entries: xi.triplets().collect() };
    serde_json::to_string_pretty(&file).expect("coo serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<InteractionMatrix> {
    let file: CooFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    if file.format != "coo" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported format `{}`", file.format) });
    }
    InteractionMatrix::from_triplets(file.n, file.entries)
}

pub fn to_csv(xi: &InteractionMatrix) -> String {
    let n = xi.n();
    let dense = xi.to_dense();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = dense[i * n..(i + 1) * n].iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<InteractionMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: ln + 1,
                    msg: format!("bad number `{}`", tok.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    for (k, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("expected {n} columns, found {}", r.len()),
            });
        }
    }
    InteractionMatrix::from_rows(&rows)
}

/// Reads a matrix, choosing the format from the first non-blank character.
pub fn read_matrix(text: &str) -> Result<InteractionMatrix> {
    match text.trim_start().chars().next() {
        Some('{') => from_json(text),
        _ => from_csv(text),
    }
}

/// Parses an edge list. The vertex count is `n` if given, otherwise one more
/// than the largest index seen.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_idx = None::<usize>;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected `u v`, got `{line}`") });
        }
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse { line: ln + 1, msg: format!("bad vertex `{t}`") })
        };
        let (u, v) = (parse(toks[0])?, parse(toks[1])?);
        if u == v {
            return Err(Error::Parse { line: ln + 1, msg: format!("self-loop at {u}") });
        }
        max_idx = Some(max_idx.unwrap_or(0).max(u).max(v));
        edges.push((u, v));
    }
    let n = n.unwrap_or(max_idx.map_or(0, |m| m + 1));
    Graph::new(n, &edges)
}

pub fn edge_list(g: &Graph) -> String {
    let mut out = format!("# n = {}\n", g.n());
    for &(a, b) in g.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::build_sequential;

    #[test]
    fn json_round_trip_is_exact() {
        let xi = build_sequential(7).unwrap();
        let back = from_json(&to_json(&xi)).unwrap();
        assert_eq!(back, xi);
        assert_eq!(read_matrix(&to_json(&xi)).unwrap(), xi);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let xi = build_sequential(6).unwrap();
        assert_eq!(from_csv(&to_csv(&xi)).unwrap(), xi);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match from_csv("0,1\n1,x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(from_csv("0,1\n1\n").is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let g = parse_edge_list("# square\n0 1\n1 2 # mid\n\n2 3\n3 0\n", None).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.regular_degree(), Some(2));
        assert_eq!(parse_edge_list(&edge_list(&g), Some(4)).unwrap(), g);
        match parse_edge_list("0 1\n1 1\n", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_edge_list("0 1 2\n", None).is_err());
    }
}
