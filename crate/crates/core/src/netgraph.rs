//! Directed acyclic unit-capacity networks: the data model, JSON form,
//! normalization, max-flow, disjoint paths, path counting and reachability.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

/// Hard cap on sources and terminals; reachability is tracked in `u64` masks.
pub const MAX_ENDPOINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("malformed network JSON: {0}")]
    Json(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(usize),
    #[error("edge ids must be exactly 0..{count}; found {id}")]
    NonDenseEdges { id: usize, count: usize },
    #[error("edge {edge} references unknown node `{node}`")]
    DanglingEndpoint { edge: usize, node: String },
    #[error("node `{0}` has a missing or unknown role")]
    MissingRole(String),
    #[error("{role} indices must be exactly 1..={count} without repeats (node `{node}`)")]
    BadRoleIndex { role: &'static str, node: String, count: usize },
    #[error("edge {0} has zero capacity")]
    ZeroCapacity(usize),
    #[error("graph has a directed cycle through node `{0}`")]
    Cycle(String),
    #[error("at most {MAX_ENDPOINTS} sources and terminals are supported")]
    TooManyEndpoints,
    #[error("only {found} disjoint paths from `{from}` to `{to}`, {wanted} requested")]
    InsufficientFlow { from: String, to: String, wanted: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Source observing `X_i`, 1-based.
    Source(usize),
    Internal,
    /// Terminal `t_j`, 1-based.
    Terminal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: u32,
}

/// Immutable validated network. Edge `i` has id `i`; adjacency lists are
/// sorted by ascending edge id, and a deterministic topological order is
/// cached at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    sources: Vec<NodeId>,
    terminals: Vec<NodeId>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    topo: Vec<NodeId>,
}

impl Network {
    /// Validates and indexes a network. `edges[i].id` must equal `i`.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, NetError> {
        let mut seen = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if seen.insert(n.name.as_str(), i).is_some() {
                return Err(NetError::DuplicateNode(n.name.clone()));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(NetError::NonDenseEdges { id: e.id, count: edges.len() });
            }
            for end in [e.tail, e.head] {
                if end >= nodes.len() {
                    return Err(NetError::DanglingEndpoint { edge: e.id, node: format!("#{end}") });
                }
            }
            if e.capacity == 0 {
                return Err(NetError::ZeroCapacity(e.id));
            }
        }
        let sources = collect_roles(&nodes, "source", |r| match r {
            Role::Source(i) => Some(i),
            _ => None,
        })?;
        let terminals = collect_roles(&nodes, "terminal", |r| match r {
            Role::Terminal(j) => Some(j),
            _ => None,
        })?;
        if sources.len() > MAX_ENDPOINTS || terminals.len() > MAX_ENDPOINTS {
            return Err(NetError::TooManyEndpoints);
        }
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for e in &edges {
            out_edges[e.tail].push(e.id);
            in_edges[e.head].push(e.id);
        }
        let topo = topological_order(nodes.len(), &edges, &out_edges, &in_edges)
            .map_err(|v| NetError::Cycle(nodes[v].name.clone()))?;
        Ok(Network { nodes, edges, sources, terminals, out_edges, in_edges, topo })
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        let raw: NetworkJson = serde_json::from_str(text).map_err(|e| NetError::Json(e.to_string()))?;
        raw.into_network()
    }

    pub fn to_json(&self) -> NetworkJson {
        NetworkJson {
            nodes: self
                .nodes
                .iter()
                .map(|n| {
                    let (role, index) = match n.role {
                        Role::Source(i) => ("source", Some(i)),
                        Role::Internal => ("internal", None),
                        Role::Terminal(j) => ("terminal", Some(j)),
                    };
                    NodeJson { id: n.name.clone(), role: role.to_string(), index }
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    id: e.id,
                    tail: self.nodes[e.tail].name.clone(),
                    head: self.nodes[e.head].name.clone(),
                    capacity: Some(e.capacity),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("network serializes")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.nodes[v].name
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn role(&self, v: NodeId) -> Role {
        self.nodes[v].role
    }

    /// Source nodes ordered by source index (`sources()[i]` observes `X_{i+1}`).
    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn terminals(&self) -> &[NodeId] {
        &self.terminals
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    /// Zero-based source position of `v`, if it is a source.
    pub fn source_pos(&self, v: NodeId) -> Option<usize> {
        match self.nodes[v].role {
            Role::Source(i) => Some(i - 1),
            _ => None,
        }
    }

    pub fn terminal_pos(&self, v: NodeId) -> Option<usize> {
        match self.nodes[v].role {
            Role::Terminal(j) => Some(j - 1),
            _ => None,
        }
    }

    pub fn is_internal(&self, v: NodeId) -> bool {
        self.nodes[v].role == Role::Internal
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.out_edges[v].len() + self.in_edges[v].len()
    }

    pub fn topo_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Position of every node in the cached topological order.
    pub fn topo_rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.nodes.len()];
        for (i, &v) in self.topo.iter().enumerate() {
            rank[v] = i;
        }
        rank
    }

    /// Edges sorted by the topological position of their tails, ties by id.
    pub fn edges_in_topo_order(&self) -> Vec<EdgeId> {
        self.topo.iter().flat_map(|&v| self.out_edges[v].iter().copied()).collect()
    }

    /// Unit capacities, sources without in-edges, terminals without out-edges.
    pub fn is_normalized(&self) -> bool {
        self.edges.iter().all(|e| e.capacity == 1)
            && self.sources.iter().all(|&s| self.in_edges[s].is_empty())
            && self.terminals.iter().all(|&t| self.out_edges[t].is_empty())
    }

    /// Largest total degree over internal nodes.
    pub fn max_internal_degree(&self) -> usize {
        (0..self.nodes.len()).filter(|&v| self.is_internal(v)).map(|v| self.degree(v)).max().unwrap_or(0)
    }
}

fn collect_roles(
    nodes: &[Node],
    role: &'static str,
    pick: impl Fn(Role) -> Option<usize>,
) -> Result<Vec<NodeId>, NetError> {
    let tagged: Vec<(usize, NodeId)> =
        nodes.iter().enumerate().filter_map(|(v, n)| pick(n.role).map(|i| (i, v))).collect();
    let count = tagged.len();
    let mut slots = vec![None; count];
    for &(i, v) in &tagged {
        if i == 0 || i > count || slots[i - 1].is_some() {
            return Err(NetError::BadRoleIndex { role, node: nodes[v].name.clone(), count });
        }
        slots[i - 1] = Some(v);
    }
    Ok(slots.into_iter().map(|s| s.expect("all slots filled")).collect())
}

/// Kahn's algorithm, always releasing the lowest-numbered ready node.
fn topological_order(
    n: usize,
    edges: &[Edge],
    out_edges: &[Vec<EdgeId>],
    in_edges: &[Vec<EdgeId>],
) -> Result<Vec<NodeId>, NodeId> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut indeg: Vec<usize> = in_edges.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<NodeId>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &e in &out_edges[v] {
            let h = edges[e].head;
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.push(Reverse(h));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&v| indeg[v] > 0).expect("some node is on a cycle"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeJson {
    pub id: String,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub id: usize,
    pub tail: String,
    pub head: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
}

/// On-disk network schema.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NetworkJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

impl NetworkJson {
    pub fn into_network(self) -> Result<Network, NetError> {
        let mut index = HashMap::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in self.nodes {
            let role = match (n.role.as_str(), n.index) {
                ("source", Some(i)) => Role::Source(i),
                ("terminal", Some(j)) => Role::Terminal(j),
                ("internal", None) => Role::Internal,
                _ => return Err(NetError::MissingRole(n.id)),
            };
            if index.insert(n.id.clone(), nodes.len()).is_some() {
                return Err(NetError::DuplicateNode(n.id));
            }
            nodes.push(Node { name: n.id, role });
        }
        let count = self.edges.len();
        let mut slots: Vec<Option<Edge>> = vec![None; count];
        for e in self.edges {
            let lookup = |name: &str| {
                index.get(name).copied().ok_or_else(|| NetError::DanglingEndpoint { edge: e.id, node: name.to_string() })
            };
            let (tail, head) = (lookup(&e.tail)?, lookup(&e.head)?);
            if e.id >= count {
                return Err(NetError::NonDenseEdges { id: e.id, count });
            }
            if slots[e.id].is_some() {
                return Err(NetError::DuplicateEdge(e.id));
            }
            slots[e.id] = Some(Edge { id: e.id, tail, head, capacity: e.capacity.unwrap_or(1) });
        }
        let edges = slots.into_iter().map(|e| e.expect("dense ids")).collect();
        Network::new(nodes, edges)
    }
}

/// Incremental construction for programmatic networks (fixtures, gadgets).
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: impl Into<String>, role: Role) -> NodeId {
        self.nodes.push(Node { name: name.into(), role });
        self.nodes.len() - 1
    }

    pub fn source(&mut self, index: usize) -> NodeId {
        self.node(format!("s{index}"), Role::Source(index))
    }

    pub fn terminal(&mut self, index: usize) -> NodeId {
        self.node(format!("t{index}"), Role::Terminal(index))
    }

    pub fn internal(&mut self, name: impl Into<String>) -> NodeId {
        self.node(name, Role::Internal)
    }

    /// Adds an internal node with a generated name.
    pub fn fresh(&mut self) -> NodeId {
        let name = format!("v{}", self.nodes.len());
        self.internal(name)
    }

    pub fn edge(&mut self, tail: NodeId, head: NodeId) -> EdgeId {
        self.edge_with_capacity(tail, head, 1)
    }

    pub fn edge_with_capacity(&mut self, tail: NodeId, head: NodeId, capacity: u32) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(Edge { id, tail, head, capacity });
        id
    }

    /// Adds `tail -> v1 -> ... -> vk -> head` with `k` fresh internal nodes.
    pub fn chain(&mut self, tail: NodeId, head: NodeId, k: usize) -> Vec<EdgeId> {
        let mut prev = tail;
        let mut ids = Vec::with_capacity(k + 1);
        for _ in 0..k {
            let v = self.fresh();
            ids.push(self.edge(prev, v));
            prev = v;
        }
        ids.push(self.edge(prev, head));
        ids
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn build(self) -> Result<Network, NetError> {
        Network::new(self.nodes, self.edges)
    }
}

/// Result of [`normalize`]: the normalized network and, for every original
/// edge, the unit edges standing in for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub network: Network,
    pub edge_map: Vec<Vec<EdgeId>>,
    /// Original node -> node holding its role after normalization.
    pub role_map: Vec<NodeId>,
}

fn unique_name(taken: &mut std::collections::HashSet<String>, base: &str) -> String {
    let mut name = format!("{base}'");
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

/// Splits capacities into parallel unit edges and moves roles off sources
/// with in-edges and terminals with out-edges onto fresh virtual nodes.
/// Original edge `i` keeps id `i` for its first unit copy; everything new
/// is appended, so a normal network maps to itself.
pub fn normalize(net: &Network) -> Normalized {
    let mut nodes: Vec<Node> = net.nodes.clone();
    let mut taken: std::collections::HashSet<String> = nodes.iter().map(|n| n.name.clone()).collect();
    let mut edges: Vec<Edge> = net.edges.iter().map(|e| Edge { capacity: 1, ..*e }).collect();
    let mut edge_map: Vec<Vec<EdgeId>> = (0..net.edges.len()).map(|i| vec![i]).collect();
    let mut role_map: Vec<NodeId> = (0..net.nodes.len()).collect();

    let push = |edges: &mut Vec<Edge>, tail, head| {
        let id = edges.len();
        edges.push(Edge { id, tail, head, capacity: 1 });
        id
    };
    for e in &net.edges {
        for _ in 1..e.capacity {
            let id = push(&mut edges, e.tail, e.head);
            edge_map[e.id].push(id);
        }
    }
    for &s in &net.sources {
        if net.in_edges[s].is_empty() {
            continue;
        }
        let width: u32 = net.out_edges[s].iter().map(|&e| net.edges[e].capacity).sum::<u32>().max(1);
        let fresh = nodes.len();
        nodes.push(Node { name: unique_name(&mut taken, &net.nodes[s].name), role: net.nodes[s].role });
        nodes[s].role = Role::Internal;
        role_map[s] = fresh;
        for _ in 0..width {
            push(&mut edges, fresh, s);
        }
    }
    for &t in &net.terminals {
        if net.out_edges[t].is_empty() {
            continue;
        }
        let width: u32 = net.in_edges[t].iter().map(|&e| net.edges[e].capacity).sum::<u32>().max(1);
        let fresh = nodes.len();
        nodes.push(Node { name: unique_name(&mut taken, &net.nodes[t].name), role: net.nodes[t].role });
        nodes[t].role = Role::Internal;
        role_map[t] = fresh;
        for _ in 0..width {
            push(&mut edges, t, fresh);
        }
    }
    let network = Network::new(nodes, edges).expect("normalization preserves validity");
    Normalized { network, edge_map, role_map }
}

/// Dense edge subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    bits: Vec<bool>,
}

impl EdgeSet {
    pub fn empty(edge_count: usize) -> Self {
        EdgeSet { bits: vec![false; edge_count] }
    }

    pub fn full(edge_count: usize) -> Self {
        EdgeSet { bits: vec![true; edge_count] }
    }

    pub fn from_edges(edge_count: usize, edges: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut s = Self::empty(edge_count);
        for e in edges {
            s.insert(e);
        }
        s
    }

    pub fn insert(&mut self, e: EdgeId) {
        if e >= self.bits.len() {
            self.bits.resize(e + 1, false);
        }
        self.bits[e] = true;
    }

    pub fn remove(&mut self, e: EdgeId) {
        if e < self.bits.len() {
            self.bits[e] = false;
        }
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.bits.get(e).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn union_with(&mut self, other: &EdgeSet) {
        for e in other.iter() {
            self.insert(e);
        }
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = self.clone();
        for e in other.iter() {
            out.remove(e);
        }
        out
    }
}

/// Nodes reachable from `starts` using only edges in `mask` (all edges when `None`).
pub fn reachable_from(net: &Network, starts: &[NodeId], mask: Option<&EdgeSet>) -> Vec<bool> {
    let mut seen = vec![false; net.node_count()];
    let mut stack: Vec<NodeId> = starts.to_vec();
    for &s in starts {
        seen[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &e in net.out_edges(v) {
            if mask.is_some_and(|m| !m.contains(e)) {
                continue;
            }
            let h = net.edge(e).head;
            if !seen[h] {
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    seen
}

/// Nodes that can reach one of `targets` using only edges in `mask`.
pub fn reaching(net: &Network, targets: &[NodeId], mask: Option<&EdgeSet>) -> Vec<bool> {
    let mut seen = vec![false; net.node_count()];
    let mut stack: Vec<NodeId> = targets.to_vec();
    for &t in targets {
        seen[t] = true;
    }
    while let Some(v) = stack.pop() {
        for &e in net.in_edges(v) {
            if mask.is_some_and(|m| !m.contains(e)) {
                continue;
            }
            let t = net.edge(e).tail;
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Fewest-edge path from `from` to `to` inside `mask`, exploring out-edges
/// in ascending id order.
pub fn bfs_path(net: &Network, from: NodeId, to: NodeId, mask: Option<&EdgeSet>) -> Option<Vec<EdgeId>> {
    let mut via: Vec<Option<EdgeId>> = vec![None; net.node_count()];
    let mut seen = vec![false; net.node_count()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = Vec::new();
            let mut cur = to;
            while let Some(e) = via[cur] {
                path.push(e);
                cur = net.edge(e).tail;
            }
            path.reverse();
            return Some(path);
        }
        for &e in net.out_edges(v) {
            if mask.is_some_and(|m| !m.contains(e)) {
                continue;
            }
            let h = net.edge(e).head;
            if !seen[h] {
                seen[h] = true;
                via[h] = Some(e);
                queue.push_back(h);
            }
        }
    }
    None
}

/// Nodes visited by a path, starting with its first tail.
pub fn path_nodes(net: &Network, path: &[EdgeId]) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(path.len() + 1);
    if let Some(&first) = path.first() {
        out.push(net.edge(first).tail);
    }
    out.extend(path.iter().map(|&e| net.edge(e).head));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disjointness {
    Edge,
    Vertex,
}

/// A collection of pairwise disjoint paths, each a contiguous edge sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    pub paths: Vec<Vec<EdgeId>>,
    pub mode: Disjointness,
}

/// Residual flow graph over arcs; arc ids double as exploration order.
struct FlowGraph {
    n: usize,
    tail: Vec<NodeId>,
    head: Vec<NodeId>,
    cap: Vec<u32>,
    flow: Vec<u32>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph { n, tail: Vec::new(), head: Vec::new(), cap: Vec::new(), flow: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn arc(&mut self, tail: NodeId, head: NodeId, cap: u32) -> usize {
        let id = self.tail.len();
        self.tail.push(tail);
        self.head.push(head);
        self.cap.push(cap);
        self.flow.push(0);
        self.adj[tail].push(id);
        self.adj[head].push(id);
        id
    }

    /// Edmonds-Karp augmentation until `limit` units or no augmenting path.
    fn run(&mut self, s: NodeId, t: NodeId, limit: usize) -> usize {
        if s == t {
            return limit;
        }
        for list in &mut self.adj {
            list.sort_unstable();
        }
        let mut total = 0;
        while total < limit {
            let mut via: Vec<Option<usize>> = vec![None; self.n];
            let mut seen = vec![false; self.n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            'bfs: while let Some(v) = queue.pop_front() {
                for &a in &self.adj[v] {
                    let (next, ok) = if self.tail[a] == v {
                        (self.head[a], self.flow[a] < self.cap[a])
                    } else {
                        (self.tail[a], self.flow[a] > 0)
                    };
                    if ok && !seen[next] {
                        seen[next] = true;
                        via[next] = Some(a);
                        if next == t {
                            break 'bfs;
                        }
                        queue.push_back(next);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            let mut cur = t;
            while cur != s {
                let a = via[cur].expect("augmenting path");
                if self.head[a] == cur {
                    self.flow[a] += 1;
                    cur = self.tail[a];
                } else {
                    self.flow[a] -= 1;
                    cur = self.head[a];
                }
            }
            total += 1;
        }
        total
    }

    /// Peels `count` unit paths off the flow, following the lowest-id arc
    /// with remaining flow at each step.
    fn decompose(&mut self, s: NodeId, t: NodeId, count: usize) -> Vec<Vec<usize>> {
        let mut paths = Vec::with_capacity(count);
        for _ in 0..count {
            let mut path = Vec::new();
            let mut cur = s;
            while cur != t {
                let a = *self.adj[cur]
                    .iter()
                    .find(|&&a| self.tail[a] == cur && self.flow[a] > 0)
                    .expect("flow conservation");
                self.flow[a] -= 1;
                path.push(a);
                cur = self.head[a];
            }
            paths.push(path);
        }
        paths
    }
}

struct Split {
    graph: FlowGraph,
    src: NodeId,
    dst: NodeId,
    /// Arc id -> original edge, `None` for node-splitting arcs.
    origin: Vec<Option<EdgeId>>,
}

fn flow_graph(net: &Network, s: NodeId, t: NodeId, mode: Disjointness, mask: Option<&EdgeSet>) -> Split {
    let n = net.node_count();
    let split = |v: NodeId| mode == Disjointness::Vertex && v != s && v != t && net.is_internal(v);
    let mut g = FlowGraph::new(2 * n);
    let mut origin = Vec::new();
    let out_of = |v: NodeId| if split(v) { n + v } else { v };
    for e in net.edges() {
        if mask.is_some_and(|m| !m.contains(e.id)) {
            continue;
        }
        g.arc(out_of(e.tail), e.head, e.capacity);
        origin.push(Some(e.id));
    }
    for v in 0..n {
        if split(v) {
            g.arc(v, n + v, 1);
            origin.push(None);
        }
    }
    Split { graph: g, src: s, dst: t, origin }
}

/// Maximum number of edge-disjoint `s -> t` paths.
pub fn max_flow(net: &Network, s: NodeId, t: NodeId) -> usize {
    flow_value(net, s, t, Disjointness::Edge, None, usize::MAX)
}

/// Maximum number of internally vertex-disjoint `s -> t` paths.
pub fn vertex_max_flow(net: &Network, s: NodeId, t: NodeId) -> usize {
    flow_value(net, s, t, Disjointness::Vertex, None, usize::MAX)
}

/// Flow value capped at `limit`, optionally restricted to `mask`.
pub fn flow_value(
    net: &Network,
    s: NodeId,
    t: NodeId,
    mode: Disjointness,
    mask: Option<&EdgeSet>,
    limit: usize,
) -> usize {
    let mut split = flow_graph(net, s, t, mode, mask);
    split.graph.run(split.src, split.dst, limit)
}

/// `k` pairwise disjoint `s -> t` paths in the requested mode.
pub fn disjoint_paths(net: &Network, s: NodeId, t: NodeId, k: usize, mode: Disjointness) -> Result<PathSet, NetError> {
    let mut split = flow_graph(net, s, t, mode, None);
    let found = split.graph.run(split.src, split.dst, k);
    if found < k {
        return Err(NetError::InsufficientFlow {
            from: net.name(s).to_string(),
            to: net.name(t).to_string(),
            wanted: k,
            found,
        });
    }
    let paths = split
        .graph
        .decompose(split.src, split.dst, k)
        .into_iter()
        .map(|arcs| arcs.into_iter().filter_map(|a| split.origin[a]).collect())
        .collect();
    Ok(PathSet { paths, mode })
}

/// Number of distinct `u -> v` paths (saturating), by dynamic programming
/// over the topological order. Restricted to `mask` when given.
pub fn path_count_in(net: &Network, u: NodeId, v: NodeId, mask: Option<&EdgeSet>) -> u64 {
    let mut count = vec![0u64; net.node_count()];
    count[u] = 1;
    for &x in net.topo_order() {
        if count[x] == 0 {
            continue;
        }
        for &e in net.out_edges(x) {
            if mask.is_some_and(|m| !m.contains(e)) {
                continue;
            }
            let h = net.edge(e).head;
            count[h] = count[h].saturating_add(count[x]);
        }
    }
    count[v]
}

pub fn path_count(net: &Network, u: NodeId, v: NodeId) -> u64 {
    path_count_in(net, u, v, None)
}

/// Upstream sources and downstream terminals of a node, as bit masks over
/// zero-based source/terminal positions. Nodes count themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Reach {
    pub sources: u64,
    pub terminals: u64,
}

/// Exact reachability via one forward and one backward topological sweep.
pub fn reach_sets(net: &Network) -> Vec<Reach> {
    let mut reach = vec![Reach::default(); net.node_count()];
    for (i, &s) in net.sources().iter().enumerate() {
        reach[s].sources |= 1 << i;
    }
    for (j, &t) in net.terminals().iter().enumerate() {
        reach[t].terminals |= 1 << j;
    }
    for &v in net.topo_order() {
        for &e in net.out_edges(v) {
            let h = net.edge(e).head;
            reach[h].sources |= reach[v].sources;
        }
    }
    for &v in net.topo_order().iter().rev() {
        for &e in net.out_edges(v) {
            let h = net.edge(e).head;
            reach[v].terminals |= reach[h].terminals;
        }
    }
    reach
}
