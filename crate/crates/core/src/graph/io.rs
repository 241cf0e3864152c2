//! Edge-list text format: first line `n d`, then one `u v` pair per line
//! with `u < v`, 0-indexed ascii decimal, every line newline-terminated.
//! Lines starting with `#` are comments and may appear anywhere; tools use
//! them to embed provenance. The writer emits edges sorted
//! lexicographically; the reader rejects any other deviation.

use super::{GraphError, RegularGraph};
use crate::VertexId;
use std::io::{BufRead, Write};

pub fn write_edge_list<W: Write>(graph: &RegularGraph, mut out: W) -> Result<(), GraphError> {
    let wrap = |e: std::io::Error| GraphError::Io(e.to_string());
    writeln!(out, "{} {}", graph.vertex_count(), graph.degree()).map_err(wrap)?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}").map_err(wrap)?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<RegularGraph, GraphError> {
    let mut lines = LineReader { inner: input, line_no: 0 };
    let header = lines
        .next_line()?
        .ok_or_else(|| GraphError::Format("empty input, expected `n d` header".into()))?;
    let (n, d) = parse_pair(&header, 1)?;
    let (n, d) = (n as usize, d as usize);
    if n == 0 || d < 2 {
        return Err(GraphError::Format(format!("header n={n} d={d} out of range")));
    }
    let expected_edges = n
        .checked_mul(d)
        .filter(|nd| nd % 2 == 0)
        .map(|nd| nd / 2)
        .ok_or(GraphError::OddDegreeSum(n * d))?;
    let mut edges = Vec::with_capacity(expected_edges);
    while let Some(line) = lines.next_line()? {
        let (u, v) = parse_pair(&line, lines.line_no)?;
        if u >= v {
            return Err(GraphError::Format(format!(
                "line {}: edges must satisfy u < v, got `{u} {v}`",
                lines.line_no
            )));
        }
        edges.push((u, v));
    }
    if edges.len() != expected_edges {
        return Err(GraphError::Format(format!(
            "expected {expected_edges} edges for n={n} d={d}, found {}",
            edges.len()
        )));
    }
    let graph = RegularGraph::from_edge_list(n, &edges)?;
    if graph.degree() != d {
        return Err(GraphError::Format(format!(
            "header declares d={d} but edges give d={}",
            graph.degree()
        )));
    }
    Ok(graph)
}

struct LineReader<R> {
    inner: R,
    line_no: usize,
}

impl<R: BufRead> LineReader<R> {
    /// Next non-comment line, insisting on the trailing newline the format
    /// requires.
    fn next_line(&mut self) -> Result<Option<String>, GraphError> {
        loop {
            let mut buf = String::new();
            let read = self
                .inner
                .read_line(&mut buf)
                .map_err(|e| GraphError::Io(e.to_string()))?;
            if read == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let Some(stripped) = buf.strip_suffix('\n') else {
                return Err(GraphError::Format(format!(
                    "line {}: missing trailing newline",
                    self.line_no
                )));
            };
            if stripped.starts_with('#') {
                continue;
            }
            return Ok(Some(stripped.to_string()));
        }
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(VertexId, VertexId), GraphError> {
    let mut parts = line.split(' ');
    let parse = |tok: Option<&str>| -> Result<VertexId, GraphError> {
        let tok = tok.ok_or_else(|| {
            GraphError::Format(format!("line {line_no}: expected two fields"))
        })?;
        // reject leading zeros, signs, empty tokens: plain ascii decimal only
        if tok.is_empty()
            || (tok.len() > 1 && tok.starts_with('0'))
            || !tok.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(GraphError::Format(format!(
                "line {line_no}: `{tok}` is not a plain decimal"
            )));
        }
        tok.parse::<VertexId>()
            .map_err(|_| GraphError::Format(format!("line {line_no}: `{tok}` out of range")))
    };
    let u = parse(parts.next())?;
    let v = parse(parts.next())?;
    if parts.next().is_some() {
        return Err(GraphError::Format(format!("line {line_no}: trailing fields")));
    }
    Ok((u, v))
}
