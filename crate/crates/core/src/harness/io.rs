//! Edge-list files: one `u v` pair per line, whitespace or comma separated,
//! `#` comments. A `# nodes: N` comment fixes the vertex count so isolated
//! vertices survive a save/load round trip.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EdgeListError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("edge list is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indexing {
    #[default]
    Zero,
    One,
}

impl FromStr for Indexing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" | "0" => Ok(Indexing::Zero),
            "one" | "1" => Ok(Indexing::One),
            other => Err(format!("indexing must be 'zero' or 'one', got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    pub indexing: Indexing,
    pub allow_self_loops: bool,
    /// Relabel the distinct labels that occur to `0..n` in ascending order
    /// instead of using `label - base` directly.
    pub compact: bool,
}

fn malformed(line: usize, message: impl Into<String>) -> EdgeListError {
    EdgeListError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_nodes_header(comment: &str) -> Option<&str> {
    let rest = comment.trim_start_matches('#').trim();
    rest.strip_prefix("nodes:").map(str::trim)
}

pub fn parse_edge_list(text: &str, options: LoadOptions) -> Result<Graph, EdgeListError> {
    let base: u64 = match options.indexing {
        Indexing::Zero => 0,
        Indexing::One => 1,
    };
    let mut declared: Option<usize> = None;
    let mut edges: Vec<(u64, u64, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(value) = parse_nodes_header(line) {
                let n = value
                    .parse::<usize>()
                    .map_err(|_| malformed(line_no, format!("bad node count '{value}'")))?;
                declared = Some(n);
            }
            continue;
        }
        let tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() != 2 {
            return Err(malformed(line_no, format!("expected two vertex labels, found {}", tokens.len())));
        }
        let mut ends = [0u64; 2];
        for (slot, tok) in ends.iter_mut().zip(&tokens) {
            let v = tok
                .parse::<u64>()
                .map_err(|_| malformed(line_no, format!("'{tok}' is not a nonnegative integer label")))?;
            if v < base {
                return Err(malformed(line_no, format!("label {v} is below the index base {base}")));
            }
            *slot = v - base;
        }
        if ends[0] == ends[1] && !options.allow_self_loops {
            return Err(malformed(line_no, format!("self-loop on {} not permitted", tokens[0])));
        }
        edges.push((ends[0], ends[1], line_no));
    }
    if edges.is_empty() && declared.is_none() {
        return Err(EdgeListError::Empty);
    }

    let index: Option<BTreeMap<u64, usize>> = options.compact.then(|| {
        let mut labels: Vec<u64> = edges.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        labels.sort_unstable();
        labels.dedup();
        labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect()
    });
    let map = |l: u64| index.as_ref().map_or(l as usize, |m| m[&l]);
    let used = edges.iter().map(|&(u, v, _)| map(u).max(map(v)) + 1).max().unwrap_or(0);
    let n = match declared {
        Some(d) if !options.compact => {
            if let Some(&(u, v, line)) = edges.iter().find(|&&(u, v, _)| u.max(v) as usize >= d) {
                return Err(malformed(line, format!("edge ({u}, {v}) exceeds declared node count {d}")));
            }
            d
        }
        _ => used,
    };
    let mut g = Graph::empty(n, options.allow_self_loops);
    for (u, v, line) in edges {
        g.add_edge(map(u), map(v)).map_err(|e| malformed(line, e.to_string()))?;
    }
    Ok(g)
}

pub fn load_edge_list(path: &Path, options: LoadOptions) -> Result<Graph, EdgeListError> {
    let text = fs::read_to_string(path).map_err(|e| EdgeListError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_edge_list(&text, options)
}

/// Zero-indexed edge list with a `# nodes: N` header.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("# nodes: {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<(), EdgeListError> {
    fs::write(path, format_edge_list(g)).map_err(|e| EdgeListError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
