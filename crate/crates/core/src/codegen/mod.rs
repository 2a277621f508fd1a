//! Code construction: greedy encoding for two sources, one-path subgraphs
//! for two terminals, and the case analysis for three sources and three
//! terminals.

mod greedy;
mod onepath;
mod random;
mod three;

pub use greedy::{assign_greedy_2s, greedy_encode, Emitter};
pub use onepath::{assign_ns_2t, extract_one_path_subgraph, OnePathSubgraph};
pub use random::{random_color_trial, RandomTrial};
pub use three::{assign_3s_3t, classify_3s3t, table_one_vector, Branch, ThreeOutcome};

use thiserror::Error;

use crate::code::{Builder, Input};
use crate::decompose::DecomposeError;
use crate::ff::{Elem, FfError, FieldSpec};
use crate::netgraph::{EdgeId, EdgeSet, NetError, Network, NodeId};
use crate::verify::VerifyError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodegenError {
    #[error("expected {expected}, network has {sources} source(s) and {terminals} terminal(s)")]
    WrongShape { expected: &'static str, sources: usize, terminals: usize },
    #[error("s{s} reaches t{t} by only {found} disjoint path(s); {needed} required")]
    Connectivity { s: usize, t: usize, found: usize, needed: usize },
    #[error("internal node `{node}` has total degree {degree}; reduce degrees first")]
    NotStructured { node: String, degree: usize },
    #[error("network must be normalized first")]
    NotNormalized,
    #[error("this branch needs field characteristic above 2, got {0}")]
    Characteristic(FieldSpec),
    #[error("random code failed {attempts} time(s); last failure: {detail}")]
    RetriesExhausted { attempts: usize, detail: String },
    #[error("construction invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Field(#[from] FfError),
}

/// Errors if some source cannot reach some terminal by `needed` paths.
pub(crate) fn require_flow(net: &Network, needed: usize, vertex: bool) -> Result<(), CodegenError> {
    use crate::netgraph::{flow_value, Disjointness};
    let mode = if vertex { Disjointness::Vertex } else { Disjointness::Edge };
    for (i, &s) in net.sources().iter().enumerate() {
        for (j, &t) in net.terminals().iter().enumerate() {
            let found = flow_value(net, s, t, mode, None, needed);
            if found < needed {
                return Err(CodegenError::Connectivity { s: i + 1, t: j + 1, found, needed });
            }
        }
    }
    Ok(())
}

/// Keeps, for every node of `union` other than `root`, its lowest-id
/// out-edge in `union`, and returns the edges on the resulting paths from
/// `starts` to `root`.
pub(crate) fn in_tree(net: &Network, union: &EdgeSet, root: NodeId, starts: &[NodeId]) -> Result<EdgeSet, CodegenError> {
    let mut tree = EdgeSet::empty(net.edge_count());
    for &s in starts {
        let mut cur = s;
        let mut steps = 0;
        while cur != root {
            let e = *net
                .out_edges(cur)
                .iter()
                .find(|&&e| union.contains(e))
                .ok_or_else(|| CodegenError::Invariant(format!("`{}` has no way to `{}`", net.name(cur), net.name(root))))?;
            tree.insert(e);
            cur = net.edge(e).head;
            steps += 1;
            if steps > net.edge_count() {
                return Err(CodegenError::Invariant("in-tree walk does not terminate".into()));
            }
        }
    }
    Ok(tree)
}

/// Assigns `edges` in topological order so that every edge carries the sum
/// of its tail's inputs inside `edges`; the tail of a starting edge uses
/// `start_inputs` instead.
pub(crate) fn sum_along(
    b: &mut Builder,
    edges: &EdgeSet,
    start_inputs: &dyn Fn(NodeId) -> Option<Vec<(Input, Elem)>>,
) -> Result<(), CodegenError> {
    let net = b.network();
    let one = b.field().one();
    let mut order: Vec<EdgeId> = edges.iter().collect();
    let rank = net.topo_rank();
    order.sort_by_key(|&e| (rank[net.edge(e).tail], e));
    for e in order {
        let tail = net.edge(e).tail;
        let inputs = match start_inputs(tail) {
            Some(list) => list,
            None => net.in_edges(tail).iter().filter(|&&x| edges.contains(x)).map(|&x| (Input::Edge(x), one)).collect(),
        };
        assign_once(b, e, inputs)?;
    }
    Ok(())
}

/// Assigns an edge that must not have been assigned by an earlier phase.
pub(crate) fn assign_once(b: &mut Builder, e: EdgeId, inputs: Vec<(Input, Elem)>) -> Result<(), CodegenError> {
    if b.is_assigned(e) {
        return Err(CodegenError::Invariant(format!("edge {e} assigned twice")));
    }
    b.assign(e, inputs);
    Ok(())
}

/// Forwards along `edges` from `root`: every tail other than `root` copies
/// its lowest-id incoming edge in `edges`.
pub(crate) fn forward_from(
    b: &mut Builder,
    edges: &EdgeSet,
    root: NodeId,
    root_inputs: Vec<(Input, Elem)>,
) -> Result<(), CodegenError> {
    let net = b.network();
    let one = b.field().one();
    let rank = net.topo_rank();
    let mut order: Vec<EdgeId> = edges.iter().collect();
    order.sort_by_key(|&e| (rank[net.edge(e).tail], e));
    for e in order {
        let tail = net.edge(e).tail;
        let inputs = if tail == root {
            root_inputs.clone()
        } else {
            let x = *net
                .in_edges(tail)
                .iter()
                .find(|&&x| edges.contains(x))
                .ok_or_else(|| CodegenError::Invariant(format!("forwarding node `{}` has no input", net.name(tail))))?;
            vec![(Input::Edge(x), one)]
        };
        assign_once(b, e, inputs)?;
    }
    Ok(())
}

pub(crate) fn require_structured(net: &Network) -> Result<(), CodegenError> {
    for v in 0..net.node_count() {
        if net.is_internal(v) && net.degree(v) > 3 {
            return Err(CodegenError::NotStructured { node: net.name(v).to_string(), degree: net.degree(v) });
        }
    }
    Ok(())
}
