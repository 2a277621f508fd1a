//! Subgraphs with exactly one path from every source to each of two
//! terminals, built by induction on the number of sources, and the
//! sum-forwarding code on top of them.

use std::collections::VecDeque;

use crate::code::{Builder, CodeAssignment, Input};
use crate::ff::Field;
use crate::netgraph::{EdgeSet, Network, NodeId};

use super::{require_flow, CodegenError};

/// Scratch graph that can grow artificial sources during the induction.
#[derive(Debug, Clone)]
struct Work {
    tail: Vec<usize>,
    head: Vec<usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

type Set = Vec<bool>;

impl Work {
    fn add_node(&mut self) -> usize {
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.out.len() - 1
    }

    fn add_edge(&mut self, t: usize, h: usize) -> usize {
        let id = self.tail.len();
        self.tail.push(t);
        self.head.push(h);
        self.out[t].push(id);
        self.inn[h].push(id);
        id
    }

    fn nodes(&self) -> usize {
        self.out.len()
    }

    fn edges(&self) -> usize {
        self.tail.len()
    }

    fn set(&self, edges: impl IntoIterator<Item = usize>) -> Set {
        let mut s = vec![false; self.edges()];
        for e in edges {
            s[e] = true;
        }
        s
    }

    fn has(s: &Set, e: usize) -> bool {
        s.get(e).copied().unwrap_or(false)
    }

    /// Fewest-edge path inside `allowed`, ties broken by ascending edge id.
    fn bfs(&self, from: usize, to: usize, allowed: &Set) -> Option<Vec<usize>> {
        let mut via = vec![None; self.nodes()];
        let mut seen = vec![false; self.nodes()];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            if v == to {
                let mut path = Vec::new();
                let mut cur = to;
                while let Some(e) = via[cur] {
                    path.push(e);
                    cur = self.tail[e];
                }
                path.reverse();
                return Some(path);
            }
            for &e in &self.out[v] {
                let h = self.head[e];
                if Self::has(allowed, e) && !seen[h] {
                    seen[h] = true;
                    via[h] = Some(e);
                    q.push_back(h);
                }
            }
        }
        None
    }

    fn forward(&self, starts: &[usize], allowed: &Set) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        let mut stack = starts.to_vec();
        for &s in starts {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &e in &self.out[v] {
                if Self::has(allowed, e) && !seen[self.head[e]] {
                    seen[self.head[e]] = true;
                    stack.push(self.head[e]);
                }
            }
        }
        seen
    }

    fn backward(&self, targets: &[usize], allowed: &Set) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        let mut stack = targets.to_vec();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &e in &self.inn[v] {
                if Self::has(allowed, e) && !seen[self.tail[e]] {
                    seen[self.tail[e]] = true;
                    stack.push(self.tail[e]);
                }
            }
        }
        seen
    }

    fn connected(&self, from: usize, to: usize, allowed: &Set) -> bool {
        self.forward(&[from], allowed)[to]
    }

    fn path_nodes(&self, path: &[usize], start: usize) -> Vec<usize> {
        let mut v = vec![start];
        v.extend(path.iter().map(|&e| self.head[e]));
        v
    }

    /// Drops edges of `path_edges`, lowest id first, while every `(from, to)`
    /// in `keep` stays connected inside `graph`.
    fn prune(&self, graph: &mut Set, path_edges: &[usize], keep: &[(usize, usize)]) {
        let mut ids = path_edges.to_vec();
        ids.sort_unstable();
        ids.dedup();
        for e in ids {
            if !Self::has(graph, e) {
                continue;
            }
            graph[e] = false;
            if !keep.iter().all(|&(a, b)| self.connected(a, b, graph)) {
                graph[e] = true;
            }
        }
    }

    fn nodes_of(&self, edges: &Set) -> Vec<bool> {
        let mut on = vec![false; self.nodes()];
        for (e, &b) in edges.iter().enumerate() {
            if b {
                on[self.tail[e]] = true;
                on[self.head[e]] = true;
            }
        }
        on
    }
}

fn union(a: &Set, b: &Set) -> Set {
    let n = a.len().max(b.len());
    (0..n).map(|e| Work::has(a, e) || Work::has(b, e)).collect()
}

/// Exactly-one-path subgraph for `sources` to `[t1, t2]` using only edges in
/// `allowed`. The last source is added on top of the subgraph for the others.
fn extract(w: &mut Work, allowed: &Set, sources: &[usize], t: [usize; 2]) -> Result<Set, CodegenError> {
    let missing = |s: usize, j: usize| CodegenError::Invariant(format!("work node {s} lost its path to terminal {}", j + 1));
    let (&sn, rest) = sources.split_last().expect("at least one source");
    let p1 = w.bfs(sn, t[0], allowed).ok_or_else(|| missing(sn, 0))?;
    let p2 = w.bfs(sn, t[1], allowed).ok_or_else(|| missing(sn, 1))?;

    if rest.is_empty() {
        // Share the first path up to its last meeting point with the second.
        let n1 = w.path_nodes(&p1, sn);
        let n2 = w.path_nodes(&p2, sn);
        let k = (0..n1.len()).rev().find(|&i| n2.contains(&n1[i])).expect("paths share the source");
        let u = n1[k];
        let j = n2.iter().position(|&x| x == u).expect("meeting node on second path");
        return Ok(w.set(p1.iter().copied().chain(p2[j..].iter().copied())));
    }

    let blue = extract(w, allowed, rest, t)?;
    let blue_nodes = w.nodes_of(&blue);
    let first_blue = |p: &[usize]| {
        let nodes = w.path_nodes(p, sn);
        let i = nodes.iter().position(|&x| blue_nodes[x]).expect("terminal is blue");
        (nodes[i], i)
    };
    let (u1, k1) = first_blue(&p1);
    let (u2, k2) = first_blue(&p2);

    for (j, (u, other)) in [(u1, t[1]), (u2, t[0])].into_iter().enumerate() {
        if !w.connected(u, other, &blue) {
            continue;
        }
        // Case j+1: keep the red path towards the terminal on the same side.
        let (red, k) = if j == 0 { (&p1, k1) } else { (&p2, k2) };
        let mut br = union(&blue, &w.set(red.iter().copied()));
        br.resize(w.edges(), false);
        w.prune(&mut br, &red[..k].iter().copied().filter(|&e| !Work::has(&blue, e)).collect::<Vec<_>>(), &[(sn, u)]);
        // Sources reaching u, and every edge on a path from them to u.
        let all: Vec<usize> = sources.to_vec();
        let up = w.forward(&all, &br);
        let down = w.backward(&[u], &br);
        let reach_u: Vec<usize> = all.iter().copied().filter(|&s| w.backward(&[u], &br)[s]).collect();
        let from_su = w.forward(&reach_u, &br);
        let gu: Set = (0..w.edges())
            .map(|e| Work::has(&br, e) && from_su[w.tail[e]] && down[w.head[e]] && up[w.tail[e]])
            .collect();
        let remaining: Vec<usize> = all.iter().copied().filter(|s| !reach_u.contains(s)).collect();
        let mut minus: Set = (0..w.edges()).map(|e| Work::has(&br, e) && !gu[e]).collect();
        let sa = w.add_node();
        let ea = w.add_edge(sa, u);
        minus.resize(w.edges(), false);
        minus[ea] = true;
        let mut next = remaining;
        next.push(sa);
        let mut sub = extract(w, &minus, &next, t)?;
        sub.resize(w.edges(), false);
        sub[ea] = false;
        return Ok(union(&sub, &gu));
    }

    // Case 3: reroute the second red prefix along the first until their last
    // meeting point, then drop red edges that are not needed.
    let n1 = w.path_nodes(&p1[..k1], sn);
    let n2 = w.path_nodes(&p2[..k2], sn);
    let m = (0..n1.len()).rev().find(|&i| n2.contains(&n1[i])).expect("prefixes share the source");
    let j = n2.iter().position(|&x| x == n1[m]).expect("meeting node");
    let red: Vec<usize> = p1[..k1].iter().chain(p1[..m].iter()).chain(p2[j..k2].iter()).copied().collect();
    let mut g = union(&blue, &w.set(red.iter().copied()));
    g.resize(w.edges(), false);
    w.prune(&mut g, &red, &[(sn, u1), (sn, u2)]);
    Ok(g)
}

/// Edge subset of a network with exactly one path from each source to each
/// of its two terminals, and no removable edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnePathSubgraph {
    pub edges: EdgeSet,
}

impl OnePathSubgraph {
    pub fn path_counts(&self, net: &Network) -> Vec<Vec<u64>> {
        net.sources()
            .iter()
            .map(|&s| {
                net.terminals().iter().map(|&t| crate::netgraph::path_count_in(net, s, t, Some(&self.edges))).collect()
            })
            .collect()
    }

    /// Edges whose removal keeps every source connected to every terminal.
    pub fn redundant_edges(&self, net: &Network) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&e| {
                let mut without = self.edges.clone();
                without.remove(e);
                net.sources().iter().all(|&s| {
                    let r = crate::netgraph::reachable_from(net, &[s], Some(&without));
                    net.terminals().iter().all(|&t| r[t])
                })
            })
            .collect()
    }
}

/// Builds the subgraph for a normalized network with two terminals where
/// every source reaches both terminals.
pub fn extract_one_path_subgraph(net: &Network) -> Result<OnePathSubgraph, CodegenError> {
    if net.terminal_count() != 2 || net.source_count() == 0 {
        return Err(CodegenError::WrongShape {
            expected: "at least one source and exactly 2 terminals",
            sources: net.source_count(),
            terminals: net.terminal_count(),
        });
    }
    if !net.is_normalized() {
        return Err(CodegenError::NotNormalized);
    }
    require_flow(net, 1, false)?;
    let mut w = Work { tail: Vec::new(), head: Vec::new(), out: Vec::new(), inn: Vec::new() };
    for _ in 0..net.node_count() {
        w.add_node();
    }
    for e in net.edges() {
        w.add_edge(e.tail, e.head);
    }
    // Virtual sources s_i' -> s_i and terminals t_j -> t_j'.
    let sources: Vec<usize> = net
        .sources()
        .iter()
        .map(|&s| {
            let v = w.add_node();
            w.add_edge(v, s);
            v
        })
        .collect();
    let mut term = [0; 2];
    for (j, &t) in net.terminals().iter().enumerate() {
        term[j] = w.add_node();
        w.add_edge(t, term[j]);
    }
    let allowed = vec![true; w.edges()];
    let g = extract(&mut w, &allowed, &sources, term)?;
    let edges = EdgeSet::from_edges(net.edge_count(), (0..net.edge_count()).filter(|&e| Work::has(&g, e)));
    let sub = OnePathSubgraph { edges };
    let counts = sub.path_counts(net);
    if let Some((i, j)) = counts
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (i, j, c)))
        .find(|&(_, _, c)| c != 1)
        .map(|(i, j, _)| (i, j))
    {
        return Err(CodegenError::Invariant(format!(
            "extraction left {} paths from s{} to t{}",
            counts[i][j],
            i + 1,
            j + 1
        )));
    }
    if let Some(e) = sub.redundant_edges(net).first() {
        return Err(CodegenError::Invariant(format!("extraction kept removable edge {e}")));
    }
    Ok(sub)
}

/// Every node of the one-path subgraph sends the sum of its inputs on each
/// output, so each terminal receives every source exactly once.
pub fn assign_ns_2t(net: &Network, field: &Field) -> Result<CodeAssignment, CodegenError> {
    let sub = extract_one_path_subgraph(net)?;
    Ok(sum_code(net, field, &sub))
}

pub(crate) fn sum_code(net: &Network, field: &Field, sub: &OnePathSubgraph) -> CodeAssignment {
    let mut b = Builder::new(net, *field);
    let one = field.one();
    for e in net.edges_in_topo_order() {
        if !sub.edges.contains(e) {
            continue;
        }
        let tail: NodeId = net.edge(e).tail;
        let mut inputs: Vec<(Input, crate::ff::Elem)> = Vec::new();
        if let Some(i) = net.source_pos(tail) {
            inputs.push((Input::Source(i + 1), one));
        }
        inputs.extend(net.in_edges(tail).iter().filter(|&&x| sub.edges.contains(x)).map(|&x| (Input::Edge(x), one)));
        b.assign(e, inputs);
    }
    b.finish()
}
