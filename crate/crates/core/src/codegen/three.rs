use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::code::{Builder, CodeAssignment, Input};
use crate::decompose::{build_aux, color_nodes, decompose, dispatch, AuxGraph, Case, Coloring, Decomposition, Label};
use crate::ff::{in_span_of, Elem, Field, Span};
use crate::netgraph::{bfs_path, disjoint_paths, Disjointness, EdgeSet, Network, NodeId};

use super::greedy::{greedy_encode, Emitter};
use super::{forward_from, in_tree, require_flow, require_structured, sum_along, CodegenError};

/// Which construction handled a three-source, three-terminal network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// A node reaches all sources and all terminals.
    Case0,
    /// A node reaches two sources and all terminals.
    Case1,
    /// A node reaches all sources and two terminals.
    Case2,
    NoColors,
    OneColor,
    ThreeColors033,
    ThreeColors222 { source_labels: usize },
    ThreeColors123,
    ManyColors,
    TwoColorsSameTerminals,
    TwoColorsSameSources,
    TwoColorsGreedy,
    TwoColorsRandom,
}

impl Branch {
    /// Every branch, for coverage bookkeeping.
    pub const ALL: [Branch; 15] = [
        Branch::Case0,
        Branch::Case1,
        Branch::Case2,
        Branch::NoColors,
        Branch::OneColor,
        Branch::ThreeColors033,
        Branch::ThreeColors222 { source_labels: 1 },
        Branch::ThreeColors222 { source_labels: 2 },
        Branch::ThreeColors222 { source_labels: 3 },
        Branch::ThreeColors123,
        Branch::ManyColors,
        Branch::TwoColorsSameTerminals,
        Branch::TwoColorsSameSources,
        Branch::TwoColorsGreedy,
        Branch::TwoColorsRandom,
    ];

    pub fn is_random(self) -> bool {
        self == Branch::TwoColorsRandom
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Case0 => write!(f, "case 0: (3,3) node"),
            Branch::Case1 => write!(f, "case 1: (2,3) node"),
            Branch::Case2 => write!(f, "case 2: (3,2) node"),
            Branch::NoColors => write!(f, "case 3: no colors"),
            Branch::OneColor => write!(f, "case 3: one color"),
            Branch::ThreeColors033 => write!(f, "case 3: three colors, degrees (0,3,3)"),
            Branch::ThreeColors222 { source_labels } => {
                write!(f, "case 3: three colors, degrees (2,2,2), {source_labels} source label(s)")
            }
            Branch::ThreeColors123 => write!(f, "case 3: three colors, degrees (1,2,3)"),
            Branch::ManyColors => write!(f, "case 3: four or more colors"),
            Branch::TwoColorsSameTerminals => write!(f, "case 3: two colors, same terminal label"),
            Branch::TwoColorsSameSources => write!(f, "case 3: two colors, same source label"),
            Branch::TwoColorsGreedy => write!(f, "case 3: two colors, singleton leaf found"),
            Branch::TwoColorsRandom => write!(f, "case 3: two colors, random code"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeOutcome {
    pub code: CodeAssignment,
    pub branch: Branch,
    /// Random draws used; 0 for deterministic branches.
    pub attempts: usize,
}

/// Payload a color subgraph multicasts, as a vector over the three sources.
/// Sum of the pair `(0,1)` gives `2X1 + X2`, `(1,2)` gives `X2 + 2X3` and
/// `(0,2)` gives `X1 - X3`; any two of them span the all-ones vector.
pub fn table_one_vector(f: &Field, sources: [usize; 2]) -> Result<Vec<Elem>, CodegenError> {
    if f.characteristic() == 2 {
        return Err(CodegenError::Characteristic(f.spec()));
    }
    let raw: [i64; 3] = match sources {
        [0, 1] => [2, 1, 0],
        [1, 2] => [0, 1, 2],
        [0, 2] => [1, 0, -1],
        other => return Err(CodegenError::Invariant(format!("no table entry for sources {other:?}"))),
    };
    Ok(raw.iter().map(|&x| f.from_i64(x)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Policy {
    Greedy,
    TableI,
    /// Multicast this source (zero-based) alone.
    Propagate(usize),
    Random,
}

/// Decomposition state shared by the case-3 phases.
#[derive(Debug, Clone)]
pub(crate) struct Colors {
    pub dec: Decomposition,
    pub coloring: Coloring,
    pub aux: AuxGraph,
}

impl Colors {
    pub fn new(net: &Network) -> Result<Self, CodegenError> {
        let dec = decompose(net)?;
        let coloring = color_nodes(net, &dec.reach, &dec.labels)?;
        let aux = build_aux(net, &coloring, &dec.leaves)?;
        Ok(Colors { dec, coloring, aux })
    }

    fn label(&self, v: NodeId) -> Label {
        self.dec.labels[v]
    }
}

fn check_shape(net: &Network) -> Result<(), CodegenError> {
    if net.source_count() != 3 || net.terminal_count() != 3 {
        return Err(CodegenError::WrongShape {
            expected: "3 sources and 3 terminals",
            sources: net.source_count(),
            terminals: net.terminal_count(),
        });
    }
    if !net.is_normalized() {
        return Err(CodegenError::NotNormalized);
    }
    require_structured(net)?;
    require_flow(net, 2, true)
}

fn distinct<T: PartialEq + Copy>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Branch and per-color policy for case 3.
pub(crate) fn plan_colors(net: &Network, c: &Colors) -> Result<(Branch, Vec<Policy>), CodegenError> {
    let palette = &c.coloring.palette;
    let k = palette.len();
    let source_labels = distinct(palette.iter().map(|x| x.sources));
    let terminal_labels = distinct(palette.iter().map(|x| x.terminals));
    let with_terminals = |t: [usize; 2]| (0..k).filter(move |&i| palette[i].terminals == t);
    Ok(match k {
        0 => (Branch::NoColors, vec![]),
        1 => (Branch::OneColor, vec![Policy::Greedy]),
        2 if palette[0].terminals == palette[1].terminals => (Branch::TwoColorsSameTerminals, vec![Policy::TableI; 2]),
        2 if palette[0].sources == palette[1].sources => (Branch::TwoColorsSameSources, vec![Policy::Greedy; 2]),
        2 => {
            if two_color_singleton(net, c)? {
                (Branch::TwoColorsGreedy, vec![Policy::Greedy; 2])
            } else {
                (Branch::TwoColorsRandom, vec![Policy::Random; 2])
            }
        }
        3 => match c.aux.sequence.as_slice() {
            [0, 3, 3] => (Branch::ThreeColors033, vec![Policy::Greedy; 3]),
            [2, 2, 2] => {
                let n = source_labels.len();
                let policies = match n {
                    1 => vec![Policy::Greedy; 3],
                    2 => {
                        let repeated = if palette.iter().filter(|x| x.sources == source_labels[0]).count() == 2 {
                            source_labels[0]
                        } else {
                            source_labels[1]
                        };
                        palette
                            .iter()
                            .map(|x| {
                                if x.sources == repeated {
                                    Policy::Greedy
                                } else {
                                    let s = x.sources.iter().copied().find(|s| !repeated.contains(s)).expect("labels differ");
                                    Policy::Propagate(s)
                                }
                            })
                            .collect()
                    }
                    _ => vec![Policy::TableI; 3],
                };
                (Branch::ThreeColors222 { source_labels: n }, policies)
            }
            [1, 2, 3] => {
                let shared = *terminal_labels
                    .iter()
                    .find(|&&t| with_terminals(t).count() == 2)
                    .ok_or_else(|| CodegenError::Invariant("degrees (1,2,3) without a shared terminal label".into()))?;
                let policies =
                    palette.iter().map(|x| if x.terminals == shared { Policy::TableI } else { Policy::Greedy }).collect();
                (Branch::ThreeColors123, policies)
            }
            other => return Err(CodegenError::Invariant(format!("three colors with degree sequence {other:?}"))),
        },
        _ => {
            let shared = *terminal_labels
                .iter()
                .find(|&&t| with_terminals(t).count() >= 2)
                .ok_or_else(|| CodegenError::Invariant("four colors without a shared terminal label".into()))?;
            let rest = (0..3).find(|t| !shared.contains(t)).expect("three terminals");
            let rest_sources = distinct(palette.iter().filter(|x| x.terminals.contains(&rest)).map(|x| x.sources));
            let policies = palette
                .iter()
                .map(|x| {
                    if x.terminals == shared || (x.terminals.contains(&rest) && rest_sources.len() >= 2) {
                        Policy::TableI
                    } else {
                        Policy::Greedy
                    }
                })
                .collect();
            (Branch::ManyColors, policies)
        }
    })
}

/// Two colors that differ in both labels: greedy works when one of the
/// non-shared sources has a singleton leaf on its two vertex-disjoint paths
/// to the shared terminal.
fn two_color_singleton(net: &Network, c: &Colors) -> Result<bool, CodegenError> {
    let [a, b] = [c.coloring.palette[0], c.coloring.palette[1]];
    let shared_t = *a
        .terminals
        .iter()
        .find(|t| b.terminals.contains(t))
        .ok_or_else(|| CodegenError::Invariant("two colors without a common terminal".into()))?;
    for (own, other) in [(a, b), (b, a)] {
        let Some(s) = own.sources.iter().copied().find(|s| !other.sources.contains(s)) else { continue };
        let paths = disjoint_paths(net, net.sources()[s], net.terminals()[shared_t], 2, Disjointness::Vertex)?;
        for p in &paths.paths {
            if let Some(leaf) = c.dec.leaf_on_path(net, p) {
                if c.label(leaf).cs == 1 {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Which top-level construction applies, without building a code.
pub fn classify_3s3t(net: &Network) -> Result<Branch, CodegenError> {
    check_shape(net)?;
    let dec = decompose(net)?;
    match dispatch(net, &dec.labels) {
        Case::Node33(_) => Ok(Branch::Case0),
        Case::Node23(_) => Ok(Branch::Case1),
        Case::Node32(_) => Ok(Branch::Case2),
        Case::Colors => Ok(plan_colors(net, &Colors::new(net)?)?.0),
    }
}

/// Code delivering `X1 + X2 + X3` to all three terminals of a normalized,
/// structured network with two vertex-disjoint paths per pair. Only the
/// two-color branch with differing labels is randomized; it uses `seed` and
/// makes at most `retries` draws.
pub fn assign_3s_3t(net: &Network, field: &Field, seed: u64, retries: usize) -> Result<ThreeOutcome, CodegenError> {
    check_shape(net)?;
    let dec = decompose(net)?;
    let done = |code, branch| Ok(ThreeOutcome { code, branch, attempts: 0 });
    match dispatch(net, &dec.labels) {
        Case::Node33(v) => done(case0(net, field, v)?, Branch::Case0),
        Case::Node23(v) => done(case1(net, field, &dec, v)?, Branch::Case1),
        Case::Node32(v) => done(case2(net, field, &dec, v)?, Branch::Case2),
        Case::Colors => {
            let colors = Colors::new(net)?;
            let (branch, policies) = plan_colors(net, &colors)?;
            if branch.is_random() {
                let (code, attempts) = super::random::retry(net, field, &colors, seed, retries)?;
                return Ok(ThreeOutcome { code, branch, attempts });
            }
            let needs_odd = branch == Branch::ThreeColors033 || policies.contains(&Policy::TableI);
            if needs_odd && field.characteristic() == 2 {
                return Err(CodegenError::Characteristic(field.spec()));
            }
            let targets = targets(field, &colors, &policies)?;
            let mut b = Builder::new(net, *field);
            let values = r_phase(&mut b, &colors, &targets, None)?;
            finish_terminals(&mut b, &colors, &values)?;
            done(b.finish(), branch)
        }
    }
}

fn union_of_paths(net: &Network, pairs: &[(NodeId, NodeId)]) -> Result<EdgeSet, CodegenError> {
    let mut set = EdgeSet::empty(net.edge_count());
    for &(u, v) in pairs {
        let p = bfs_path(net, u, v, None)
            .ok_or_else(|| CodegenError::Invariant(format!("no path from `{}` to `{}`", net.name(u), net.name(v))))?;
        for e in p {
            set.insert(e);
        }
    }
    Ok(set)
}

fn source_input(net: &Network, one: Elem) -> impl Fn(NodeId) -> Option<Vec<(Input, Elem)>> + '_ {
    move |v| net.source_pos(v).map(|i| vec![(Input::Source(i + 1), one)])
}

fn tree_inputs(net: &Network, tree: &EdgeSet, v: NodeId, one: Elem) -> Vec<(Input, Elem)> {
    net.in_edges(v).iter().filter(|&&e| tree.contains(e)).map(|&e| (Input::Edge(e), one)).collect()
}

fn case0(net: &Network, field: &Field, v: NodeId) -> Result<CodeAssignment, CodegenError> {
    let one = field.one();
    let sources = net.sources().to_vec();
    let red = union_of_paths(net, &sources.iter().map(|&s| (s, v)).collect::<Vec<_>>())?;
    let blue = union_of_paths(net, &net.terminals().iter().map(|&t| (v, t)).collect::<Vec<_>>())?;
    if let Some(e) = red.iter().find(|&e| blue.contains(e)) {
        return Err(CodegenError::Invariant(format!("edge {e} is both upstream and downstream of `{}`", net.name(v))));
    }
    let tree = in_tree(net, &red, v, &sources)?;
    let mut b = Builder::new(net, *field);
    sum_along(&mut b, &tree, &source_input(net, one))?;
    forward_from(&mut b, &blue, v, tree_inputs(net, &tree, v, one))?;
    Ok(b.finish())
}

fn case1(net: &Network, field: &Field, dec: &Decomposition, v: NodeId) -> Result<CodeAssignment, CodegenError> {
    let one = field.one();
    let mine: Vec<usize> = (0..3).filter(|&i| dec.reach[v].sources >> i & 1 == 1).collect();
    let other = (0..3).find(|i| !mine.contains(i)).expect("two of three sources");
    let starts: Vec<NodeId> = mine.iter().map(|&i| net.sources()[i]).collect();
    let blue_union = union_of_paths(net, &starts.iter().map(|&s| (s, v)).collect::<Vec<_>>())?;
    let blue = in_tree(net, &blue_union, v, &starts)?;
    let touched = crate::netgraph::reachable_from(net, &[net.sources()[other]], None);
    for e in blue_union.iter() {
        let t = net.edge(e).tail;
        if touched[t] {
            return Err(CodegenError::Invariant(format!("s{} reaches `{}` upstream of `{}`", other + 1, net.name(t), net.name(v))));
        }
    }
    let mut b = Builder::new(net, *field);
    sum_along(&mut b, &blue, &source_input(net, one))?;
    let rest = EdgeSet::full(net.edge_count()).difference(&blue_union);
    let emitters = [
        Emitter { node: net.sources()[other], inputs: vec![(Input::Source(other + 1), one)] },
        Emitter { node: v, inputs: tree_inputs(net, &blue, v, one) },
    ];
    greedy_encode(&mut b, Some(&rest), &emitters);
    Ok(b.finish())
}

fn case2(net: &Network, field: &Field, dec: &Decomposition, v: NodeId) -> Result<CodeAssignment, CodegenError> {
    let one = field.one();
    let mine: Vec<usize> = (0..3).filter(|&j| dec.reach[v].terminals >> j & 1 == 1).collect();
    let r = (0..3).find(|j| !mine.contains(j)).expect("two of three terminals");
    let tr = net.terminals()[r];
    let sources = net.sources().to_vec();
    let to_v = union_of_paths(net, &sources.iter().map(|&s| (s, v)).collect::<Vec<_>>())?;
    let tree = in_tree(net, &to_v, v, &sources)?;
    let blue = union_of_paths(net, &mine.iter().map(|&j| (v, net.terminals()[j])).collect::<Vec<_>>())?;

    // Walk of each source inside the tree, and its path to the third terminal.
    let tree_walk = |s: NodeId| -> Vec<NodeId> {
        let mut nodes = vec![s];
        let mut cur = s;
        while cur != v {
            let e = *net.out_edges(cur).iter().find(|&&e| tree.contains(e)).expect("tree reaches root");
            cur = net.edge(e).head;
            nodes.push(cur);
        }
        nodes
    };
    let mut branch_points = Vec::new();
    let mut suffixes = EdgeSet::empty(net.edge_count());
    for (i, &s) in sources.iter().enumerate() {
        let q = bfs_path(net, s, tr, None).ok_or_else(|| CodegenError::Invariant(format!("s{} misses t{}", i + 1, r + 1)))?;
        let q_nodes = crate::netgraph::path_nodes(net, &q);
        let walk = tree_walk(s);
        let vi = *walk.iter().rev().find(|x| q_nodes.contains(x)).expect("walk starts at the source");
        if vi == v {
            return Err(CodegenError::Invariant(format!("root `{}` reaches t{}", net.name(v), r + 1)));
        }
        let k = q_nodes.iter().position(|&x| x == vi).expect("on path");
        for &e in &q[k..] {
            if tree.contains(e) || blue.contains(e) {
                return Err(CodegenError::Invariant(format!("path from s{} to t{} reuses edge {e}", i + 1, r + 1)));
            }
            suffixes.insert(e);
        }
        branch_points.push((vi, i));
    }
    let mut b = Builder::new(net, *field);
    sum_along(&mut b, &tree, &source_input(net, one))?;
    let starts: Vec<NodeId> = branch_points.iter().map(|&(x, _)| x).collect();
    let to_r = in_tree(net, &suffixes, tr, &starts)?;
    let emit = |x: NodeId| -> Option<Vec<(Input, Elem)>> {
        let &(_, i) = branch_points.iter().find(|&&(y, _)| y == x)?;
        match net.source_pos(x) {
            Some(_) => Some(vec![(Input::Source(i + 1), one)]),
            None => Some(tree_inputs(net, &tree, x, one)),
        }
    };
    sum_along(&mut b, &to_r, &emit)?;
    for &(x, i) in &branch_points {
        if let Some(&e) = net.out_edges(x).iter().find(|&&e| to_r.contains(e)) {
            if b.beta(e) != field.unit(3, i) {
                return Err(CodegenError::Invariant(format!("`{}` does not hold X{} alone", net.name(x), i + 1)));
            }
        }
    }
    forward_from(&mut b, &blue, v, tree_inputs(net, &tree, v, one))?;
    Ok(b.finish())
}

fn targets(field: &Field, c: &Colors, policies: &[Policy]) -> Result<Vec<Option<Vec<Elem>>>, CodegenError> {
    c.coloring
        .palette
        .iter()
        .zip(policies)
        .map(|(color, p)| {
            Ok(match *p {
                Policy::Greedy => {
                    let mut v = vec![field.zero(); 3];
                    for &s in &color.sources {
                        v[s] = field.one();
                    }
                    Some(v)
                }
                Policy::TableI => Some(table_one_vector(field, color.sources)?),
                Policy::Propagate(s) => Some(field.unit(3, s)),
                Policy::Random => None,
            })
        })
        .collect()
}

fn random_elem(field: &Field, rng: &mut ChaCha8Rng) -> Elem {
    field.elem(rng.gen_range(0..field.order() as u64)).expect("in range")
}

/// Assigns every remaining edge. Sources send their symbol, nodes fed by a
/// single source forward it, and colored nodes send their color's payload.
/// With `rng`, every non-source node instead draws fresh coefficients per
/// out-edge, and every leaf draws the combination it will offer its
/// terminals; those combinations are returned per node.
pub(crate) fn r_phase(
    b: &mut Builder,
    c: &Colors,
    targets: &[Option<Vec<Elem>>],
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<Vec<Option<Vec<(Input, Elem)>>>, CodegenError> {
    let net = b.network();
    let field = *b.field();
    let one = field.one();
    let is_leaf: Vec<bool> = {
        let mut l = vec![false; net.node_count()];
        for list in &c.dec.leaves {
            for &v in list {
                l[v] = true;
            }
        }
        l
    };
    let mut values = vec![None; net.node_count()];
    for &v in net.topo_order() {
        let label = c.label(v);
        if label.cs == 0 || label.ct < 2 {
            continue;
        }
        let outs: Vec<usize> = net
            .out_edges(v)
            .iter()
            .copied()
            .filter(|&e| c.dec.classes[e] == crate::decompose::EdgeClass::Remaining)
            .collect();
        let inputs = b.inputs_of(v);
        if let Some(i) = net.source_pos(v) {
            for &e in &outs {
                super::assign_once(b, e, vec![(Input::Source(i + 1), one)])?;
            }
            if is_leaf[v] && rng.is_some() {
                values[v] = Some(vec![(Input::Source(i + 1), one)]);
            }
            continue;
        }
        if let Some(rng) = rng.as_deref_mut() {
            for &e in &outs {
                let comb = inputs.iter().map(|&inp| (inp, random_elem(&field, rng))).collect::<Vec<_>>();
                super::assign_once(b, e, comb)?;
            }
            if is_leaf[v] {
                values[v] = Some(inputs.iter().map(|&inp| (inp, random_elem(&field, rng))).collect());
            }
            continue;
        }
        let comb = match c.coloring.node_color[v] {
            None => {
                let first = inputs.iter().copied().find(|&inp| b.input_vector(inp).iter().any(|x| !x.is_zero()));
                match first {
                    Some(inp) => vec![(inp, one)],
                    None => continue,
                }
            }
            Some(k) => {
                let target = targets[k].as_ref().ok_or_else(|| CodegenError::Invariant("random color in fixed mode".into()))?;
                let rows: Vec<Vec<Elem>> = inputs.iter().map(|&inp| b.input_vector(inp)).collect();
                match in_span_of(&field, target, &rows)? {
                    Span::Member(coeffs) => inputs.iter().copied().zip(coeffs).collect(),
                    Span::Outside { .. } => {
                        return Err(CodegenError::Invariant(format!(
                            "`{}` of color {} cannot form its payload",
                            net.name(v),
                            c.coloring.palette[k]
                        )))
                    }
                }
            }
        };
        for &e in &outs {
            super::assign_once(b, e, comb.clone())?;
        }
    }
    Ok(values)
}

/// Routes, for every terminal, a decoding combination of its leaves'
/// contents to the terminal along its private edges. A leaf offers either
/// its drawn combination from `values` or each of its inputs separately.
pub(crate) fn finish_terminals(
    b: &mut Builder,
    c: &Colors,
    values: &[Option<Vec<(Input, Elem)>>],
) -> Result<(), CodegenError> {
    let net = b.network();
    let field = *b.field();
    let one = field.one();
    for (j, &t) in net.terminals().iter().enumerate() {
        let mut offers: Vec<(NodeId, Vec<(Input, Elem)>)> = Vec::new();
        for &v in &c.dec.leaves[j] {
            match &values[v] {
                Some(comb) => offers.push((v, comb.clone())),
                None => {
                    for inp in b.inputs_of(v) {
                        if b.input_vector(inp).iter().any(|x| !x.is_zero()) {
                            offers.push((v, vec![(inp, one)]));
                        }
                    }
                }
            }
        }
        let rows: Vec<Vec<Elem>> = offers
            .iter()
            .map(|(_, comb)| {
                let mut acc = vec![field.zero(); 3];
                for &(inp, k) in comb {
                    field.axpy(&mut acc, k, &b.input_vector(inp));
                }
                acc
            })
            .collect();
        let coeffs = match in_span_of(&field, &field.ones(3), &rows)? {
            Span::Member(c) => c,
            Span::Outside { rank, .. } => {
                return Err(CodegenError::Invariant(format!("t{} leaves span rank {rank} without the sum", j + 1)))
            }
        };
        let mut emission: Vec<(NodeId, Vec<(Input, Elem)>)> = Vec::new();
        for ((v, comb), k) in offers.iter().zip(coeffs) {
            if k.is_zero() {
                continue;
            }
            let scaled = comb.iter().map(|&(inp, x)| (inp, field.mul(x, k)));
            match emission.iter_mut().find(|(u, _)| u == v) {
                Some((_, list)) => list.extend(scaled),
                None => emission.push((*v, scaled.collect())),
            }
        }
        let mask = c.dec.terminal_edges(j);
        let mut union = EdgeSet::empty(net.edge_count());
        for (v, _) in &emission {
            let e = *net
                .out_edges(*v)
                .iter()
                .find(|&&e| mask.contains(e))
                .ok_or_else(|| CodegenError::Invariant(format!("leaf `{}` has no t{}-edge", net.name(*v), j + 1)))?;
            union.insert(e);
            let path = bfs_path(net, net.edge(e).head, t, Some(&mask))
                .ok_or_else(|| CodegenError::Invariant(format!("t{}-edge {e} does not reach t{}", j + 1, j + 1)))?;
            for x in path {
                union.insert(x);
            }
        }
        let starts: Vec<NodeId> = emission.iter().map(|(v, _)| *v).collect();
        let tree = in_tree(net, &union, t, &starts)?;
        let emit = |x: NodeId| emission.iter().find(|(v, _)| *v == x).map(|(_, list)| list.clone());
        sum_along(b, &tree, &emit)?;
    }
    Ok(())
}
