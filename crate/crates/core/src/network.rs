//! Two-terminal resistor networks and their plain-text file format.
//!
//! File format, one record per line:
//!
//! ```text
//! terminals A0: a A1: b c
//! edge a x 1.5
//! edge x b inf
//! edge x c 0
//! ```
//!
//! Vertex ids are arbitrary whitespace-free tokens. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ext::{ExtResistance, ResistanceError};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub r: ExtResistance,
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("edge {index} has endpoint {vertex} outside 0..{num_vertices}")]
    UnknownVertex {
        index: usize,
        vertex: VertexId,
        num_vertices: usize,
    },
    #[error("edge {index} is a self-loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: VertexId },
    #[error("terminal vertex {0} is outside the vertex set")]
    UnknownTerminal(VertexId),
    #[error("vertex {0} belongs to both terminal sets")]
    OverlappingTerminals(VertexId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Resistance {
        line: usize,
        #[source]
        source: ResistanceError,
    },
}

/// A finite multigraph with edge resistances in `[0, ∞]` and terminal sets `A0`, `A1`.
///
/// Vertices are `0..num_vertices`; optional labels are used only for I/O.
/// Either terminal set may be empty, in which case the effective resistance is ∞.
#[derive(Clone, Debug, PartialEq)]
pub struct ResistorNetwork {
    num_vertices: usize,
    edges: Vec<Edge>,
    a0: Vec<VertexId>,
    a1: Vec<VertexId>,
    labels: Option<Vec<String>>,
}

impl ResistorNetwork {
    pub fn new(
        num_vertices: usize,
        edges: Vec<Edge>,
        a0: Vec<VertexId>,
        a1: Vec<VertexId>,
    ) -> Result<Self, NetworkError> {
        for (index, e) in edges.iter().enumerate() {
            for vertex in [e.u, e.v] {
                if vertex >= num_vertices {
                    return Err(NetworkError::UnknownVertex {
                        index,
                        vertex,
                        num_vertices,
                    });
                }
            }
            if e.u == e.v {
                return Err(NetworkError::SelfLoop { index, vertex: e.u });
            }
        }
        let mut side = vec![0u8; num_vertices];
        for (set, tag) in [(&a0, 1u8), (&a1, 2u8)] {
            for &t in set {
                if t >= num_vertices {
                    return Err(NetworkError::UnknownTerminal(t));
                }
                if side[t] != 0 && side[t] != tag {
                    return Err(NetworkError::OverlappingTerminals(t));
                }
                side[t] = tag;
            }
        }
        let mut a0 = a0;
        let mut a1 = a1;
        a0.sort_unstable();
        a0.dedup();
        a1.sort_unstable();
        a1.dedup();
        Ok(ResistorNetwork {
            num_vertices,
            edges,
            a0,
            a1,
            labels: None,
        })
    }

    /// Convenience constructor from `(u, v, r)` triples with finite `f64` or ∞ resistances.
    pub fn from_triples(
        num_vertices: usize,
        triples: &[(VertexId, VertexId, f64)],
        a0: &[VertexId],
        a1: &[VertexId],
    ) -> Result<Self, NetworkError> {
        let edges = triples
            .iter()
            .enumerate()
            .map(|(line, &(u, v, r))| {
                ExtResistance::new(r)
                    .map(|r| Edge { u, v, r })
                    .map_err(|source| NetworkError::Resistance { line, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(num_vertices, edges, a0.to_vec(), a1.to_vec())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.num_vertices, "one label per vertex");
        self.labels = Some(labels);
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn a0(&self) -> &[VertexId] {
        &self.a0
    }

    pub fn a1(&self) -> &[VertexId] {
        &self.a1
    }

    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    /// Copy with edge `index` given resistance `r`.
    pub fn with_edge_resistance(&self, index: usize, r: ExtResistance) -> Self {
        let mut out = self.clone();
        out.edges[index].r = r;
        out
    }

    /// Copy with edge `index` removed.
    pub fn without_edge(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.edges.remove(index);
        out
    }

    /// Copy with one extra edge.
    pub fn with_edge(&self, edge: Edge) -> Result<Self, NetworkError> {
        let mut edges = self.edges.clone();
        edges.push(edge);
        let mut out = Self::new(self.num_vertices, edges, self.a0.clone(), self.a1.clone())?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Merges parallel edges between the same vertex pair into one.
    pub fn merge_parallel(&self) -> Self {
        let mut merged: HashMap<(VertexId, VertexId), ExtResistance> = HashMap::new();
        let mut order = Vec::new();
        for e in &self.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            match merged.get_mut(&key) {
                Some(r) => *r = r.parallel(e.r),
                None => {
                    merged.insert(key, e.r);
                    order.push(key);
                }
            }
        }
        let edges = order
            .into_iter()
            .map(|(u, v)| Edge {
                u,
                v,
                r: merged[&(u, v)],
            })
            .collect();
        ResistorNetwork {
            edges,
            ..self.clone()
        }
    }

    pub fn parse(text: &str) -> Result<Self, NetworkError> {
        let mut ids: HashMap<String, VertexId> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let mut intern = |tok: &str| -> VertexId {
            if let Some(&id) = ids.get(tok) {
                return id;
            }
            let id = labels.len();
            labels.push(tok.to_string());
            ids.insert(tok.to_string(), id);
            id
        };
        let mut terminals: Option<(Vec<VertexId>, Vec<VertexId>)> = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            match toks[0] {
                "terminals" => {
                    if terminals.is_some() {
                        return Err(NetworkError::Parse {
                            line,
                            message: "duplicate terminals header".into(),
                        });
                    }
                    if toks.get(1) != Some(&"A0:") {
                        return Err(NetworkError::Parse {
                            line,
                            message: "expected `terminals A0: <ids> A1: <ids>`".into(),
                        });
                    }
                    let split = toks.iter().position(|t| *t == "A1:").ok_or_else(|| {
                        NetworkError::Parse {
                            line,
                            message: "missing `A1:`".into(),
                        }
                    })?;
                    let a0 = toks[2..split].iter().map(|t| intern(t)).collect();
                    let a1 = toks[split + 1..].iter().map(|t| intern(t)).collect();
                    terminals = Some((a0, a1));
                }
                "edge" => {
                    if toks.len() != 4 {
                        return Err(NetworkError::Parse {
                            line,
                            message: "expected `edge <u> <v> <r>`".into(),
                        });
                    }
                    let u = intern(toks[1]);
                    let v = intern(toks[2]);
                    let r = toks[3]
                        .parse::<ExtResistance>()
                        .map_err(|source| NetworkError::Resistance { line, source })?;
                    edges.push(Edge { u, v, r });
                }
                other => {
                    return Err(NetworkError::Parse {
                        line,
                        message: format!("unknown record `{other}`"),
                    })
                }
            }
        }
        let (a0, a1) = terminals.ok_or(NetworkError::Parse {
            line: 0,
            message: "missing terminals header".into(),
        })?;
        let n = labels.len();
        Ok(Self::new(n, edges, a0, a1)?.with_labels(labels))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |set: &[VertexId]| -> String {
            set.iter()
                .map(|&v| self.label(v))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            out,
            "terminals A0: {} A1: {}",
            join(&self.a0),
            join(&self.a1)
        );
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {} {}", self.label(e.u), self.label(e.v), e.r);
        }
        out
    }
}
