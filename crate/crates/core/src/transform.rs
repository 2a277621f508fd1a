//! Degree reduction to structured graphs (internal total degree at most 3)
//! and lifting of linear codes back to the original network.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::code::{CodeAssignment, Input};
use crate::ff::{Elem, FfError};
use crate::netgraph::{EdgeId, Network, NetworkBuilder, NodeId, Role};
use crate::verify::{check_sum_decodable, VerifyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("degree reduction expects a normalized network")]
    NotNormalized,
    #[error("code does not belong to the reduced network")]
    Mismatch,
    #[error("reduced code is not sum-decodable; refusing to lift it")]
    Infeasible,
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Field(#[from] FfError),
}

/// Replacement of one high-degree node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gadget {
    /// Node in the original network.
    pub node: NodeId,
    /// Gadget nodes in the reduced network.
    pub nodes: Vec<NodeId>,
    /// Original in-edges, in order; each keeps its id in the reduced network.
    pub inputs: Vec<EdgeId>,
    pub outputs: Vec<EdgeId>,
}

/// Original edge `e` is edge `e` of the reduced network as well; gadget
/// edges are numbered after the original ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredReduction {
    pub original: Network,
    pub reduced: Network,
    pub edge_map: Vec<EdgeId>,
    /// Original node -> reduced node, `None` for replaced nodes.
    pub node_map: Vec<Option<NodeId>>,
    pub gadgets: Vec<Gadget>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetJson {
    pub node: String,
    pub nodes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MappingJson {
    pub edge_map: Vec<(EdgeId, EdgeId)>,
    pub node_map: Vec<(String, Option<String>)>,
    pub gadgets: Vec<GadgetJson>,
}

impl StructuredReduction {
    pub fn mapping_json(&self) -> MappingJson {
        MappingJson {
            edge_map: self.edge_map.iter().enumerate().map(|(a, &b)| (a, b)).collect(),
            node_map: self
                .node_map
                .iter()
                .enumerate()
                .map(|(v, m)| (self.original.name(v).to_string(), m.map(|r| self.reduced.name(r).to_string())))
                .collect(),
            gadgets: self
                .gadgets
                .iter()
                .map(|g| GadgetJson {
                    node: self.original.name(g.node).to_string(),
                    nodes: g.nodes.iter().map(|&v| self.reduced.name(v).to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.gadgets.is_empty()
    }
}

/// Builds a binary tree with `leaves` leaves under `root`. `down` orients
/// edges away from the root. Returns the leaves left to right.
fn binary_tree(
    b: &mut NetworkBuilder,
    names: &mut Namer,
    root: NodeId,
    leaves: usize,
    down: bool,
    pending: &mut Vec<(NodeId, NodeId)>,
) -> Vec<NodeId> {
    if leaves <= 1 {
        return vec![root];
    }
    let left = leaves.div_ceil(2);
    let mut out = Vec::with_capacity(leaves);
    for count in [left, leaves - left] {
        let child = names.node(b);
        pending.push(if down { (root, child) } else { (child, root) });
        out.extend(binary_tree(b, names, child, count, down, pending));
    }
    out
}

struct Namer {
    taken: HashSet<String>,
    prefix: String,
    counter: usize,
    created: Vec<NodeId>,
}

impl Namer {
    fn node(&mut self, b: &mut NetworkBuilder) -> NodeId {
        loop {
            let name = format!("{}.{}", self.prefix, self.counter);
            self.counter += 1;
            if self.taken.insert(name.clone()) {
                let v = b.internal(name);
                self.created.push(v);
                return v;
            }
        }
    }
}

/// Replaces every internal node of total degree above 3 by a gadget of
/// fan-out trees (one per in-link), inverted trees (one per out-link) and
/// cross edges, so that each in-link reaches each out-link.
pub fn reduce_degrees(net: &Network) -> Result<StructuredReduction, TransformError> {
    if !net.is_normalized() {
        return Err(TransformError::NotNormalized);
    }
    let replace: Vec<bool> = (0..net.node_count()).map(|v| net.is_internal(v) && net.degree(v) > 3).collect();
    let mut b = NetworkBuilder::new();
    let mut node_map = vec![None; net.node_count()];
    let mut taken: HashSet<String> = net.nodes().iter().map(|n| n.name.clone()).collect();
    for (v, node) in net.nodes().iter().enumerate() {
        if !replace[v] {
            node_map[v] = Some(b.node(node.name.clone(), node.role));
        }
    }

    // Endpoints of each original edge in the reduced network.
    let mut tail_of: Vec<Option<NodeId>> = net.edges().iter().map(|e| node_map[e.tail]).collect();
    let mut head_of: Vec<Option<NodeId>> = net.edges().iter().map(|e| node_map[e.head]).collect();
    let mut inner: Vec<(NodeId, NodeId)> = Vec::new();
    let mut gadgets = Vec::new();

    for v in (0..net.node_count()).filter(|&v| replace[v]) {
        let ins = net.in_edges(v).to_vec();
        let outs = net.out_edges(v).to_vec();
        let mut namer = Namer { taken: std::mem::take(&mut taken), prefix: net.name(v).to_string(), counter: 0, created: Vec::new() };
        // A side with no links still gets one tree so the other side stays connected.
        let (d_in, d_out) = (ins.len().max(1), outs.len().max(1));
        let mut x_leaves = Vec::with_capacity(d_in);
        for i in 0..d_in {
            let root = namer.node(&mut b);
            if let Some(&e) = ins.get(i) {
                head_of[e] = Some(root);
            }
            x_leaves.push(binary_tree(&mut b, &mut namer, root, d_out, true, &mut inner));
        }
        let mut y_leaves = Vec::with_capacity(d_out);
        for j in 0..d_out {
            let root = namer.node(&mut b);
            if let Some(&e) = outs.get(j) {
                tail_of[e] = Some(root);
            }
            y_leaves.push(binary_tree(&mut b, &mut namer, root, d_in, false, &mut inner));
        }
        for (i, xs) in x_leaves.iter().enumerate() {
            for (j, &x) in xs.iter().enumerate() {
                inner.push((x, y_leaves[j][i]));
            }
        }
        taken = namer.taken;
        gadgets.push(Gadget { node: v, nodes: namer.created, inputs: ins, outputs: outs });
    }

    for e in net.edges() {
        b.edge(tail_of[e.id].expect("tail mapped"), head_of[e.id].expect("head mapped"));
    }
    for (t, h) in inner {
        b.edge(t, h);
    }
    let reduced = b.build().expect("gadget insertion keeps the network valid");
    debug_assert!(reduced.max_internal_degree() <= 3);
    Ok(StructuredReduction {
        original: net.clone(),
        edge_map: (0..net.edge_count()).collect(),
        reduced,
        node_map,
        gadgets,
    })
}

/// Turns a feasible code on the reduced network into one on the original.
/// Each original edge out of a replaced node gets the composite linear map
/// from the gadget's in-links to its boundary edge.
pub fn lift_code(red: &StructuredReduction, code: &CodeAssignment) -> Result<CodeAssignment, TransformError> {
    if code.edge_count() != red.reduced.edge_count() {
        return Err(TransformError::Mismatch);
    }
    if !check_sum_decodable(&red.reduced, code)?.all_decodable {
        return Err(TransformError::Infeasible);
    }
    let f = code.field.build()?;
    let orig = &red.original;
    let mut out = CodeAssignment::zero(code.field, orig.edge_count());
    let mut gadget_of = vec![None; orig.node_count()];
    for (g, gadget) in red.gadgets.iter().enumerate() {
        gadget_of[gadget.node] = Some(g);
    }
    // Reduced edge -> original edge, for edges that survive as boundary edges.
    let mut back = vec![None; red.reduced.edge_count()];
    for (e, &r) in red.edge_map.iter().enumerate() {
        back[r] = Some(e);
    }

    for e in 0..orig.edge_count() {
        let tail = orig.edge(e).tail;
        let r = red.edge_map[e];
        match gadget_of[tail] {
            None => {
                let inputs = code.get(r).iter().map(|&(inp, c)| match inp {
                    Input::Edge(x) => (Input::Edge(back[x].expect("input of unreplaced node is a boundary edge")), c),
                    Input::Source(i) => (Input::Source(i), c),
                });
                out.set(&f, e, inputs);
            }
            Some(g) => {
                let gadget = &red.gadgets[g];
                let k = gadget.inputs.len();
                // Vectors over the gadget's in-links for every reduced edge touched.
                let mut vec_of: std::collections::HashMap<EdgeId, Vec<Elem>> = std::collections::HashMap::new();
                for (i, &x) in gadget.inputs.iter().enumerate() {
                    vec_of.insert(red.edge_map[x], f.unit(k, i));
                }
                let inside: HashSet<NodeId> = gadget.nodes.iter().copied().collect();
                for &v in red.reduced.topo_order() {
                    if !inside.contains(&v) {
                        continue;
                    }
                    for &oe in red.reduced.out_edges(v) {
                        let mut acc = vec![Elem::ZERO; k];
                        for &(inp, c) in code.get(oe) {
                            if let Input::Edge(x) = inp {
                                if let Some(src) = vec_of.get(&x) {
                                    f.axpy(&mut acc, c, &src.clone());
                                }
                            }
                        }
                        vec_of.insert(oe, acc);
                    }
                }
                let v = &vec_of[&r];
                out.set(&f, e, gadget.inputs.iter().zip(v).map(|(&x, &c)| (Input::Edge(x), c)));
            }
        }
    }
    Ok(out)
}

/// Role-preserving check used by tests and assertions.
pub fn endpoints_preserved(red: &StructuredReduction) -> bool {
    let o = &red.original;
    let r = &red.reduced;
    o.source_count() == r.source_count()
        && o.terminal_count() == r.terminal_count()
        && o.sources().iter().zip(r.sources()).all(|(&a, &b)| o.name(a) == r.name(b) && matches!(r.role(b), Role::Source(_)))
        && o.terminals().iter().zip(r.terminals()).all(|(&a, &b)| o.name(a) == r.name(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{reachable_from, vertex_max_flow};

    fn hub(d_in: usize, d_out: usize) -> (Network, NodeId) {
        let mut b = NetworkBuilder::new();
        let srcs: Vec<_> = (1..=d_in).map(|i| b.source(i)).collect();
        let v = b.internal("v");
        let ts: Vec<_> = (1..=d_out).map(|j| b.terminal(j)).collect();
        for &s in &srcs {
            b.edge(s, v);
        }
        for &t in &ts {
            b.edge(v, t);
        }
        (b.build().unwrap(), v)
    }

    #[test]
    fn gadget_connects_every_pair() {
        let (net, _) = hub(3, 3);
        let red = reduce_degrees(&net).unwrap();
        let r = &red.reduced;
        assert!(r.max_internal_degree() <= 3);
        assert_eq!(red.gadgets.len(), 1);
        for i in 0..3 {
            let reach = reachable_from(r, &[r.edge(i).head], None);
            for j in 3..6 {
                assert!(reach[r.edge(j).tail], "in-link {i} reaches out-link {j}");
            }
        }
        assert!(endpoints_preserved(&red));
    }

    #[test]
    fn small_degree_is_identity() {
        let (net, _) = hub(1, 2);
        let red = reduce_degrees(&net).unwrap();
        assert!(red.is_identity());
        assert_eq!(red.reduced, net);
    }

    #[test]
    fn vertex_flow_after_reduction() {
        // two sources and two terminals through one hub, doubled edges
        let mut b = NetworkBuilder::new();
        let s = b.source(1);
        let v = b.internal("v");
        let w = b.internal("w");
        let t = b.terminal(1);
        b.edge(s, v);
        b.edge(s, w);
        b.edge(v, w);
        b.edge(v, t);
        b.edge(w, t);
        b.edge(s, v);
        b.edge(w, t);
        let net = b.build().unwrap();
        let red = reduce_degrees(&net).unwrap();
        let r = &red.reduced;
        let (s2, t2) = (r.sources()[0], r.terminals()[0]);
        assert!(vertex_max_flow(r, s2, t2) >= 2);
    }
}
