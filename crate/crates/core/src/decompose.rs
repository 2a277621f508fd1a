//! Structural decomposition of a source/terminal network: connectivity
//! labels, terminal and remaining edges, leaf sets, colors of (2,2) nodes
//! and the terminal/color incidence graph.

use serde::Serialize;
use thiserror::Error;

use crate::netgraph::{reach_sets, reachable_from, EdgeSet, Network, NodeId, Reach};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("node `{node}` labeled ({cs},{ct}); colors need a network without (3,3), (2,3) or (3,2) nodes")]
    NotColorable { node: String, cs: u32, ct: u32 },
    #[error("edge {edge} joins (2,2) nodes of different colors")]
    ColorsTouch { edge: usize },
    #[error("head of remaining edge {edge} reaches {ct} terminal(s)")]
    BadRemainingEdge { edge: usize, ct: u32 },
    #[error("color {color} has terminal {terminal} in its support but no leaf of that terminal carries it")]
    MissingLeaf { color: String, terminal: usize },
    #[error("auxiliary graph invariant violated: {0}")]
    Aux(String),
}

/// Number of sources upstream and terminals downstream of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Label {
    pub cs: u32,
    pub ct: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    /// Head reaches exactly one terminal (zero-based position).
    Terminal(usize),
    /// Head reaches two or more terminals.
    Remaining,
    /// Carries nothing: no source upstream of the tail or no terminal downstream of the head.
    Unused,
}

/// Source and terminal pairs of a (2,2) node, zero-based and sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color {
    pub sources: [usize; 2],
    pub terminals: [usize; 2],
}

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(s{},s{},t{},t{})",
            self.sources[0] + 1,
            self.sources[1] + 1,
            self.terminals[0] + 1,
            self.terminals[1] + 1
        )
    }
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub reach: Vec<Reach>,
    pub labels: Vec<Label>,
    pub classes: Vec<EdgeClass>,
    /// `leaves[j]`: in-degree-0 nodes of the subgraph of `t_j`-edges, ascending.
    pub leaves: Vec<Vec<NodeId>>,
}

pub fn label_nodes(net: &Network) -> (Vec<Reach>, Vec<Label>) {
    let reach = reach_sets(net);
    let labels = reach.iter().map(|r| Label { cs: r.sources.count_ones(), ct: r.terminals.count_ones() }).collect();
    (reach, labels)
}

pub fn classify_edges(net: &Network, reach: &[Reach], labels: &[Label]) -> Result<Vec<EdgeClass>, DecomposeError> {
    net.edges()
        .iter()
        .map(|e| {
            let (lt, lh) = (labels[e.tail], labels[e.head]);
            Ok(match lh.ct {
                _ if lt.cs == 0 || lh.ct == 0 => EdgeClass::Unused,
                1 => EdgeClass::Terminal(reach[e.head].terminals.trailing_zeros() as usize),
                ct if ct >= 2 => EdgeClass::Remaining,
                ct => return Err(DecomposeError::BadRemainingEdge { edge: e.id, ct }),
            })
        })
        .collect()
}

pub fn leaf_sets(net: &Network, classes: &[EdgeClass]) -> Vec<Vec<NodeId>> {
    let mut leaves = vec![Vec::new(); net.terminal_count()];
    for (j, list) in leaves.iter_mut().enumerate() {
        let mut has_in = vec![false; net.node_count()];
        let mut touched = vec![false; net.node_count()];
        for e in net.edges() {
            if classes[e.id] == EdgeClass::Terminal(j) {
                has_in[e.head] = true;
                touched[e.tail] = true;
            }
        }
        list.extend((0..net.node_count()).filter(|&v| touched[v] && !has_in[v]));
    }
    leaves
}

pub fn decompose(net: &Network) -> Result<Decomposition, DecomposeError> {
    let (reach, labels) = label_nodes(net);
    let classes = classify_edges(net, &reach, &labels)?;
    let leaves = leaf_sets(net, &classes);
    Ok(Decomposition { reach, labels, classes, leaves })
}

impl Decomposition {
    pub fn terminal_edges(&self, j: usize) -> EdgeSet {
        EdgeSet::from_edges(
            self.classes.len(),
            self.classes.iter().enumerate().filter(|(_, c)| **c == EdgeClass::Terminal(j)).map(|(e, _)| e),
        )
    }

    /// Leaf of `t_j` on a source-to-`t_j` path: the last node with `ct >= 2`.
    pub fn leaf_on_path(&self, net: &Network, path: &[usize]) -> Option<NodeId> {
        crate::netgraph::path_nodes(net, path).into_iter().rev().find(|&v| self.labels[v].ct >= 2)
    }

    /// Structural properties that hold by construction: no terminal edge
    /// feeds a remaining edge, and every `t_j`-edge reaches `t_j` inside
    /// the `t_j`-edge subgraph.
    pub fn check_structure(&self, net: &Network) -> Result<(), String> {
        let heads: Vec<NodeId> = net
            .edges()
            .iter()
            .filter(|e| matches!(self.classes[e.id], EdgeClass::Terminal(_)))
            .map(|e| e.head)
            .collect();
        let below = reachable_from(net, &heads, None);
        for e in net.edges() {
            if self.classes[e.id] == EdgeClass::Remaining && below[e.tail] {
                return Err(format!("remaining edge {} lies downstream of a terminal edge", e.id));
            }
        }
        for (j, &t) in net.terminals().iter().enumerate() {
            let mask = self.terminal_edges(j);
            let reach_t = crate::netgraph::reaching(net, &[t], Some(&mask));
            for e in mask.iter() {
                if !reach_t[net.edge(e).head] {
                    return Err(format!("t{}-edge {e} does not reach t{}", j + 1, j + 1));
                }
            }
        }
        Ok(())
    }
}

/// Dispatch for the three-source, three-terminal construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case", content = "node", rename_all = "snake_case")]
pub enum Case {
    Node33(NodeId),
    Node23(NodeId),
    Node32(NodeId),
    Colors,
}

/// First node in topological order labeled (3,3), else (2,3), else (3,2).
pub fn dispatch(net: &Network, labels: &[Label]) -> Case {
    let find = |cs, ct| net.topo_order().iter().copied().find(|&v| labels[v] == Label { cs, ct });
    if let Some(v) = find(3, 3) {
        Case::Node33(v)
    } else if let Some(v) = find(2, 3) {
        Case::Node23(v)
    } else if let Some(v) = find(3, 2) {
        Case::Node32(v)
    } else {
        Case::Colors
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    /// Index into `palette` for (2,2) nodes.
    pub node_color: Vec<Option<usize>>,
    /// Distinct colors, sorted.
    pub palette: Vec<Color>,
}

impl Coloring {
    pub fn nodes_of(&self, c: usize) -> Vec<NodeId> {
        (0..self.node_color.len()).filter(|&v| self.node_color[v] == Some(c)).collect()
    }
}

/// Colors every (2,2) node and checks that no edge joins different colors.
pub fn color_nodes(net: &Network, reach: &[Reach], labels: &[Label]) -> Result<Coloring, DecomposeError> {
    for &v in net.topo_order() {
        let l = labels[v];
        if matches!((l.cs, l.ct), (3, 3) | (2, 3) | (3, 2)) {
            return Err(DecomposeError::NotColorable { node: net.name(v).to_string(), cs: l.cs, ct: l.ct });
        }
    }
    let raw: Vec<Option<Color>> = (0..net.node_count())
        .map(|v| {
            (labels[v] == Label { cs: 2, ct: 2 }).then(|| {
                let s = bits(reach[v].sources);
                let t = bits(reach[v].terminals);
                Color { sources: [s[0], s[1]], terminals: [t[0], t[1]] }
            })
        })
        .collect();
    let mut palette: Vec<Color> = raw.iter().flatten().copied().collect();
    palette.sort();
    palette.dedup();
    for e in net.edges() {
        if let (Some(a), Some(b)) = (raw[e.tail], raw[e.head]) {
            if a != b {
                return Err(DecomposeError::ColorsTouch { edge: e.id });
            }
        }
    }
    let node_color = raw.iter().map(|c| c.map(|c| palette.binary_search(&c).expect("in palette"))).collect();
    Ok(Coloring { node_color, palette })
}

/// Terminal/color incidence: terminal `t_j` is adjacent to color `c` when
/// one of its leaves has color `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxGraph {
    /// `adjacency[c]`: terminals (zero-based) adjacent to color `c`.
    pub adjacency: Vec<Vec<usize>>,
    /// Degree of each terminal.
    pub degrees: Vec<usize>,
    /// Terminal degrees sorted ascending.
    pub sequence: Vec<usize>,
}

pub fn build_aux(net: &Network, coloring: &Coloring, leaves: &[Vec<NodeId>]) -> Result<AuxGraph, DecomposeError> {
    let k = coloring.palette.len();
    let mut adjacency = vec![Vec::new(); k];
    for (j, list) in leaves.iter().enumerate() {
        for &v in list {
            if let Some(c) = coloring.node_color[v] {
                if !adjacency[c].contains(&j) {
                    adjacency[c].push(j);
                }
            }
        }
    }
    for (c, adj) in adjacency.iter_mut().enumerate() {
        adj.sort_unstable();
        let color = coloring.palette[c];
        for &t in &color.terminals {
            if !adj.contains(&t) {
                return Err(DecomposeError::MissingLeaf { color: color.to_string(), terminal: t + 1 });
            }
        }
        if adj.len() != 2 {
            return Err(DecomposeError::Aux(format!("color {color} has degree {}", adj.len())));
        }
    }
    let mut degrees = vec![0; net.terminal_count()];
    for adj in &adjacency {
        for &t in adj {
            degrees[t] += 1;
        }
    }
    if k == 3 && degrees.iter().any(|&d| d > 3) {
        return Err(DecomposeError::Aux("terminal degree above 3".into()));
    }
    let mut sequence = degrees.clone();
    sequence.sort_unstable();
    Ok(AuxGraph { adjacency, degrees, sequence })
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeReport {
    pub id: String,
    pub cs: u32,
    pub ct: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeReport {
    pub id: usize,
    pub class: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafSetReport {
    pub terminal: String,
    pub leaves: Vec<String>,
}

/// JSON view of a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub nodes: Vec<NodeReport>,
    pub edges: Vec<EdgeReport>,
    pub leaf_sets: Vec<LeafSetReport>,
    pub dispatch: Case,
    pub colors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux_degrees: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_sequence: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn report(net: &Network) -> Result<DecompositionReport, DecomposeError> {
    let d = decompose(net)?;
    let case = dispatch(net, &d.labels);
    let mut note = None;
    let (coloring, aux) = match color_nodes(net, &d.reach, &d.labels) {
        Ok(c) => {
            let aux = match build_aux(net, &c, &d.leaves) {
                Ok(a) => Some(a),
                Err(e) => {
                    note = Some(e.to_string());
                    None
                }
            };
            (Some(c), aux)
        }
        Err(e) => {
            note = Some(e.to_string());
            (None, None)
        }
    };
    let nodes = (0..net.node_count())
        .map(|v| NodeReport {
            id: net.name(v).to_string(),
            cs: d.labels[v].cs,
            ct: d.labels[v].ct,
            color: coloring
                .as_ref()
                .and_then(|c| c.node_color[v].map(|k| c.palette[k].to_string())),
        })
        .collect();
    let edges = d
        .classes
        .iter()
        .enumerate()
        .map(|(id, c)| match c {
            EdgeClass::Terminal(j) => EdgeReport { id, class: "terminal", terminal: Some(j + 1) },
            EdgeClass::Remaining => EdgeReport { id, class: "remaining", terminal: None },
            EdgeClass::Unused => EdgeReport { id, class: "unused", terminal: None },
        })
        .collect();
    let leaf_sets = d
        .leaves
        .iter()
        .enumerate()
        .map(|(j, l)| LeafSetReport {
            terminal: net.name(net.terminals()[j]).to_string(),
            leaves: l.iter().map(|&v| net.name(v).to_string()).collect(),
        })
        .collect();
    Ok(DecompositionReport {
        nodes,
        edges,
        leaf_sets,
        dispatch: case,
        colors: coloring.map(|c| c.palette.iter().map(|c| c.to_string()).collect()).unwrap_or_default(),
        aux_degrees: aux.as_ref().map(|a| a.degrees.clone()),
        degree_sequence: aux.map(|a| a.sequence),
        note,
    })
}
