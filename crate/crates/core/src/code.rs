//! Linear code assignments: per-edge local encoding coefficients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{Elem, FfError, Field, FieldSpec};
use crate::netgraph::{EdgeId, Network};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("malformed code JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error("code names edge {edge}, network has {count} edges")]
    UnknownEdge { edge: usize, count: usize },
    #[error("edge {edge} listed twice")]
    DuplicateEdge { edge: usize },
    #[error("input entry on edge {edge} must name exactly one of `edge` or `source`")]
    AmbiguousInput { edge: usize },
    #[error("edge {edge} references {input}, which is not an input of its tail")]
    NotAnInput { edge: usize, input: String },
    #[error("code covers {found} edges, network has {expected}")]
    EdgeCount { found: usize, expected: usize },
    #[error("code is over {code}, expected {expected}")]
    FieldMismatch { code: FieldSpec, expected: FieldSpec },
}

/// Something an edge's tail can combine: an incoming edge, or the source
/// symbol observed at the tail (1-based source index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Input {
    Edge(EdgeId),
    Source(usize),
}

impl std::fmt::Display for Input {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Input::Edge(e) => write!(f, "edge {e}"),
            Input::Source(i) => write!(f, "source X{i}"),
        }
    }
}

/// `local[e]` lists the nonzero `(input, coefficient)` pairs of edge `e`,
/// sorted by input. Edges with an empty list carry zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeAssignment {
    pub field: FieldSpec,
    local: Vec<Vec<(Input, Elem)>>,
}

impl CodeAssignment {
    pub fn zero(field: FieldSpec, edge_count: usize) -> Self {
        CodeAssignment { field, local: vec![Vec::new(); edge_count] }
    }

    pub fn edge_count(&self) -> usize {
        self.local.len()
    }

    /// Replaces the local coefficients of `e`, merging repeated inputs.
    pub fn set(&mut self, f: &Field, e: EdgeId, inputs: impl IntoIterator<Item = (Input, Elem)>) {
        let mut merged: Vec<(Input, Elem)> = Vec::new();
        for (inp, c) in inputs {
            match merged.iter_mut().find(|(i, _)| *i == inp) {
                Some(slot) => slot.1 = f.add(slot.1, c),
                None => merged.push((inp, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        merged.sort_by_key(|(i, _)| *i);
        self.local[e] = merged;
    }

    pub fn get(&self, e: EdgeId) -> &[(Input, Elem)] {
        &self.local[e]
    }

    pub fn is_active(&self, e: EdgeId) -> bool {
        !self.local[e].is_empty()
    }

    /// Multiplies every source coefficient of source `i` (1-based) by
    /// `weights[i-1]`, so a code delivering `sum X_i` delivers
    /// `sum weights_i X_i`.
    pub fn scale_sources(&self, f: &Field, weights: &[Elem]) -> CodeAssignment {
        let mut out = self.clone();
        for list in &mut out.local {
            for (inp, c) in list.iter_mut() {
                if let Input::Source(i) = *inp {
                    *c = f.mul(*c, weights[i - 1]);
                }
            }
            list.retain(|(_, c)| !c.is_zero());
        }
        out
    }

    /// Checks that every input is an in-edge of the tail or the tail's own source.
    pub fn check_inputs(&self, net: &Network) -> Result<(), CodeError> {
        if self.local.len() != net.edge_count() {
            return Err(CodeError::EdgeCount { found: self.local.len(), expected: net.edge_count() });
        }
        for (e, list) in self.local.iter().enumerate() {
            let tail = net.edge(e).tail;
            for &(inp, _) in list {
                let ok = match inp {
                    Input::Edge(x) => x < net.edge_count() && net.edge(x).head == tail,
                    Input::Source(i) => net.source_pos(tail) == Some(i.wrapping_sub(1)),
                };
                if !ok {
                    return Err(CodeError::NotAnInput { edge: e, input: inp.to_string() });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> CodeJson {
        CodeJson {
            field: self.field,
            edges: self
                .local
                .iter()
                .enumerate()
                .map(|(id, list)| EdgeCodeJson {
                    id,
                    inputs: list
                        .iter()
                        .map(|&(inp, c)| match inp {
                            Input::Edge(e) => InputJson { edge: Some(e), source: None, coeff: c.value() as u64 },
                            Input::Source(i) => InputJson { edge: None, source: Some(i), coeff: c.value() as u64 },
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("code serializes")
    }

    /// Parses a code for a network with `edge_count` edges. Edges not listed
    /// carry zero.
    pub fn from_json(text: &str, edge_count: usize) -> Result<Self, CodeError> {
        let raw: CodeJson = serde_json::from_str(text).map_err(|e| CodeError::Json(e.to_string()))?;
        raw.into_code(edge_count)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InputJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
    pub coeff: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeCodeJson {
    pub id: usize,
    pub inputs: Vec<InputJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CodeJson {
    pub field: FieldSpec,
    pub edges: Vec<EdgeCodeJson>,
}

impl CodeJson {
    pub fn into_code(self, edge_count: usize) -> Result<CodeAssignment, CodeError> {
        let f = self.field.build()?;
        let mut code = CodeAssignment::zero(self.field, edge_count);
        let mut seen = vec![false; edge_count];
        for e in self.edges {
            if e.id >= edge_count {
                return Err(CodeError::UnknownEdge { edge: e.id, count: edge_count });
            }
            if std::mem::replace(&mut seen[e.id], true) {
                return Err(CodeError::DuplicateEdge { edge: e.id });
            }
            let mut inputs = Vec::with_capacity(e.inputs.len());
            for inp in e.inputs {
                let which = match (inp.edge, inp.source) {
                    (Some(x), None) => Input::Edge(x),
                    (None, Some(i)) => Input::Source(i),
                    _ => return Err(CodeError::AmbiguousInput { edge: e.id }),
                };
                inputs.push((which, f.elem(inp.coeff)?));
            }
            code.set(&f, e.id, inputs);
        }
        Ok(code)
    }
}

/// Incremental code construction that tracks global coding vectors, so
/// generators can query what an edge carries while assigning downstream.
#[derive(Debug, Clone)]
pub struct Builder<'a> {
    net: &'a Network,
    field: Field,
    code: CodeAssignment,
    beta: Vec<Vec<Elem>>,
}

impl<'a> Builder<'a> {
    pub fn new(net: &'a Network, field: Field) -> Self {
        let n = net.source_count();
        Builder {
            net,
            field,
            code: CodeAssignment::zero(field.spec(), net.edge_count()),
            beta: vec![vec![Elem::ZERO; n]; net.edge_count()],
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    /// Global vector carried by an input under the current assignment.
    pub fn input_vector(&self, inp: Input) -> Vec<Elem> {
        match inp {
            Input::Edge(e) => self.beta[e].clone(),
            Input::Source(i) => self.field.unit(self.net.source_count(), i - 1),
        }
    }

    /// Assigns `e` and recomputes its global vector. Inputs must already
    /// be final; callers work in topological order.
    pub fn assign(&mut self, e: EdgeId, inputs: impl IntoIterator<Item = (Input, Elem)>) {
        self.code.set(&self.field, e, inputs);
        let mut v = vec![Elem::ZERO; self.net.source_count()];
        for &(inp, c) in self.code.get(e) {
            let x = self.input_vector(inp);
            self.field.axpy(&mut v, c, &x);
        }
        self.beta[e] = v;
    }

    pub fn beta(&self, e: EdgeId) -> &[Elem] {
        &self.beta[e]
    }

    pub fn is_assigned(&self, e: EdgeId) -> bool {
        self.code.is_active(e)
    }

    /// Inputs available at node `v`: its source symbol (if any) and in-edges.
    pub fn inputs_of(&self, v: crate::netgraph::NodeId) -> Vec<Input> {
        let mut out: Vec<Input> = Vec::new();
        if let Some(i) = self.net.source_pos(v) {
            out.push(Input::Source(i + 1));
        }
        out.extend(self.net.in_edges(v).iter().map(|&e| Input::Edge(e)));
        out
    }

    pub fn finish(self) -> CodeAssignment {
        self.code
    }
}
