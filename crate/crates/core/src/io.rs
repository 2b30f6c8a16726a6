//! Reading and writing graph files, configurations and replay sequences.
//!
//! Graph files are ASCII, whitespace-separated, one graph per file, with
//! `#` starting a comment that runs to the end of the line:
//!
//! ```text
//! group Z2|Cs|Z2xCs
//! vertices <n>
//! edge <tail> <head> <c> <d> <r>     # one line per edge, r in {0,1}
//! point <vertex> <x> <y>             # optional configuration lines
//! ```
//!
//! `point` lines attach a configuration; when any appear, every vertex must
//! receive exactly one.  Serialization writes edges in storage order and
//! floats in shortest round-tripping form, so
//! `parse_graph(serialize_graph(g)) == g` exactly.
//!
//! Replay sequences are stored as JSON lines, one [`ReplayStep`] per line.

use crate::gain_graph::{GainGraph, GraphError};
use crate::group::{GroupElement, GroupTag};
use crate::moves::ReplayStep;
use std::fmt::Write as _;
use thiserror::Error;

/// Errors for the text formats, with 1-based line numbers.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing '{0}' line")]
    MissingHeader(&'static str),
    #[error("invalid graph: {0}")]
    Invalid(#[from] GraphError),
    #[error("configuration covers {got} of {need} vertices")]
    PointCount { got: usize, need: usize },
}

/// A parsed graph file: the graph and, when `point` lines were present, a
/// full configuration.
#[derive(Clone, Debug)]
pub struct ParsedGraph {
    pub graph: GainGraph,
    pub points: Option<Vec<[f64; 2]>>,
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, msg: msg.into() }
}

fn token<T: std::str::FromStr>(
    line: usize,
    tokens: &[&str],
    index: usize,
    what: &str,
) -> Result<T, ParseError> {
    let raw = tokens
        .get(index)
        .ok_or_else(|| malformed(line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| malformed(line, format!("cannot read {what} from '{raw}'")))
}

/// Parse a graph file, including any appended configuration.
pub fn parse_graph(text: &str) -> Result<ParsedGraph, ParseError> {
    let mut group: Option<GroupTag> = None;
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize, usize, GroupElement)> = Vec::new();
    let mut points: Vec<(usize, usize, [f64; 2])> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(&keyword) = tokens.first() else { continue };
        match keyword {
            "group" => {
                let tag: &str = tokens
                    .get(1)
                    .ok_or_else(|| malformed(line, "missing group name"))?;
                let tag = tag
                    .parse()
                    .map_err(|e: String| malformed(line, e))?;
                if group.replace(tag).is_some() {
                    return Err(malformed(line, "duplicate 'group' line"));
                }
            }
            "vertices" => {
                let count = token(line, &tokens, 1, "vertex count")?;
                if n.replace(count).is_some() {
                    return Err(malformed(line, "duplicate 'vertices' line"));
                }
            }
            "edge" => {
                let tail = token(line, &tokens, 1, "tail")?;
                let head = token(line, &tokens, 2, "head")?;
                let c = token(line, &tokens, 3, "gain component c")?;
                let d = token(line, &tokens, 4, "gain component d")?;
                let r: u8 = token(line, &tokens, 5, "reflection flag")?;
                if r > 1 {
                    return Err(malformed(line, format!("reflection flag must be 0 or 1, got {r}")));
                }
                if tokens.len() > 6 {
                    return Err(malformed(line, "trailing tokens after edge"));
                }
                edges.push((line, tail, head, GroupElement::new(c, d, r == 1)));
            }
            "point" => {
                let v = token(line, &tokens, 1, "vertex")?;
                let x = token(line, &tokens, 2, "x coordinate")?;
                let y = token(line, &tokens, 3, "y coordinate")?;
                points.push((line, v, [x, y]));
            }
            other => {
                return Err(malformed(line, format!("unknown keyword '{other}'")));
            }
        }
    }
    let group = group.ok_or(ParseError::MissingHeader("group"))?;
    let n = n.ok_or(ParseError::MissingHeader("vertices"))?;
    let mut graph = GainGraph::new(group, n);
    for &(line, tail, head, gain) in &edges {
        for v in [tail, head] {
            if v >= n {
                return Err(malformed(
                    line,
                    format!("vertex {v} out of range for {n} vertices"),
                ));
            }
        }
        graph.push_edge(tail, head, gain);
    }
    graph.validate()?;
    let points = if points.is_empty() {
        None
    } else {
        let mut filled: Vec<Option<[f64; 2]>> = vec![None; n];
        for &(line, v, p) in &points {
            if v >= n {
                return Err(malformed(line, format!("point vertex {v} out of range")));
            }
            if filled[v].replace(p).is_some() {
                return Err(malformed(line, format!("duplicate point for vertex {v}")));
            }
        }
        let got = filled.iter().flatten().count();
        if got != n {
            return Err(ParseError::PointCount { got, need: n });
        }
        Some(filled.into_iter().flatten().collect())
    };
    Ok(ParsedGraph { graph, points })
}

/// Serialize a graph (and optionally a configuration) in the file format.
pub fn serialize_graph(g: &GainGraph, points: Option<&[[f64; 2]]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "group {}", g.group());
    let _ = writeln!(out, "vertices {}", g.num_vertices());
    for e in g.edges() {
        let _ = writeln!(
            out,
            "edge {} {} {} {} {}",
            e.tail,
            e.head,
            e.gain.c,
            e.gain.d,
            u8::from(e.gain.r)
        );
    }
    if let Some(points) = points {
        for (v, p) in points.iter().enumerate() {
            let _ = writeln!(out, "point {v} {} {}", p[0], p[1]);
        }
    }
    out
}

/// Parse a replay sequence: one JSON step per non-empty line.
pub fn read_replay(text: &str) -> Result<Vec<ReplayStep>, ParseError> {
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let step = serde_json::from_str(trimmed)
            .map_err(|e| malformed(idx + 1, e.to_string()))?;
        steps.push(step);
    }
    Ok(steps)
}

/// Serialize a replay sequence as JSON lines.
pub fn write_replay(steps: &[ReplayStep]) -> String {
    let mut out = String::new();
    for step in steps {
        let line = serde_json::to_string(step).expect("replay steps serialize");
        out.push_str(&line);
        out.push('\n');
    }
    out
}
