//! Reference implementations used as oracles by the integration tests.
//! They share no code with the library beyond the data types.
#![allow(dead_code)]

use std::collections::HashMap;

use sumcast::code::{CodeAssignment, Input};
use sumcast::ff::{Elem, Field};
use sumcast::netgraph::{Network, NodeId};

/// Counts `u -> v` paths by explicit depth-first enumeration.
pub fn dfs_path_count(net: &Network, u: NodeId, v: NodeId) -> u64 {
    fn go(net: &Network, cur: NodeId, v: NodeId) -> u64 {
        if cur == v {
            return 1;
        }
        net.out_edges(cur).iter().map(|&e| go(net, net.edge(e).head, v)).sum()
    }
    go(net, u, v)
}

/// `u -> v` paths using only edges with `keep(e)`, by explicit enumeration.
pub fn dfs_path_count_in(net: &Network, u: NodeId, v: NodeId, keep: &dyn Fn(usize) -> bool) -> u64 {
    if u == v {
        return 1;
    }
    net.out_edges(u).iter().filter(|&&e| keep(e)).map(|&e| dfs_path_count_in(net, net.edge(e).head, v, keep)).sum()
}

/// Nodes reachable from `start` (inclusive), by plain DFS.
pub fn downstream(net: &Network, start: NodeId) -> Vec<bool> {
    let mut seen = vec![false; net.node_count()];
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut seen[x], true) {
            continue;
        }
        for &e in net.out_edges(x) {
            stack.push(net.edge(e).head);
        }
    }
    seen
}

/// Tries every coefficient vector over the field.
pub fn exhaustive_span(f: &Field, target: &[Elem], rows: &[Vec<Elem>]) -> Option<Vec<Elem>> {
    let elems: Vec<Elem> = f.elements().collect();
    let q = elems.len();
    let total = q.pow(rows.len() as u32);
    for code in 0..total {
        let mut k = code;
        let coeffs: Vec<Elem> = (0..rows.len())
            .map(|_| {
                let c = elems[k % q];
                k /= q;
                c
            })
            .collect();
        let mut acc = vec![f.zero(); target.len()];
        for (c, row) in coeffs.iter().zip(rows) {
            for (a, &x) in acc.iter_mut().zip(row) {
                *a = f.add(*a, f.mul(*c, x));
            }
        }
        if acc == target {
            return Some(coeffs);
        }
    }
    if rows.is_empty() && target.iter().all(|x| x.is_zero()) {
        return Some(vec![]);
    }
    None
}

/// Rank by elimination that picks the last usable row as pivot, the
/// reverse of the library's order.
pub fn reverse_pivot_rank(f: &Field, rows: &[Vec<Elem>]) -> usize {
    let mut m: Vec<Vec<Elem>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).rev().find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = f.inv(m[rank][c]).unwrap();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let k = f.mul(m[r][c], inv);
                for j in 0..cols {
                    let sub = f.mul(k, m[rank][j]);
                    m[r][j] = f.sub(m[r][j], sub);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Values on every edge when sources hold `x`, simulated from the local
/// coefficients in edge topological order.
pub fn simulate(net: &Network, code: &CodeAssignment, f: &Field, x: &[Elem]) -> Vec<Elem> {
    let mut order: Vec<usize> = (0..net.edge_count()).collect();
    let mut rank = vec![0usize; net.node_count()];
    // longest-path depth gives a valid topological key
    let mut changed = true;
    while changed {
        changed = false;
        for e in net.edges() {
            if rank[e.head] < rank[e.tail] + 1 {
                rank[e.head] = rank[e.tail] + 1;
                changed = true;
            }
        }
    }
    order.sort_by_key(|&e| rank[net.edge(e).tail]);
    let mut val = vec![f.zero(); net.edge_count()];
    for e in order {
        let mut acc = f.zero();
        for &(inp, c) in code.get(e) {
            let v = match inp {
                Input::Edge(x_e) => val[x_e],
                Input::Source(i) => x[i - 1],
            };
            acc = f.add(acc, f.mul(c, v));
        }
        val[e] = acc;
    }
    val
}

/// Whether each terminal's received values determine `sum X_i`, by replay
/// over every source tuple.
pub fn replay_decodable(net: &Network, code: &CodeAssignment, f: &Field) -> Vec<bool> {
    let elems: Vec<Elem> = f.elements().collect();
    let q = elems.len();
    let n = net.source_count();
    let mut seen: Vec<HashMap<Vec<u32>, u32>> = vec![HashMap::new(); net.terminal_count()];
    let mut ok = vec![true; net.terminal_count()];
    for code_ix in 0..q.pow(n as u32) {
        let mut k = code_ix;
        let x: Vec<Elem> = (0..n)
            .map(|_| {
                let e = elems[k % q];
                k /= q;
                e
            })
            .collect();
        let sum = x.iter().fold(f.zero(), |a, &b| f.add(a, b)).value();
        let vals = simulate(net, code, f, &x);
        for (j, &t) in net.terminals().iter().enumerate() {
            let key: Vec<u32> = net.in_edges(t).iter().map(|&e| vals[e].value()).collect();
            if *seen[j].entry(key).or_insert(sum) != sum {
                ok[j] = false;
            }
        }
    }
    ok
}

/// Global vectors recomputed from `simulate` on unit source vectors.
pub fn unit_columns(net: &Network, code: &CodeAssignment, f: &Field) -> Vec<Vec<Elem>> {
    let n = net.source_count();
    let cols: Vec<Vec<Elem>> = (0..n).map(|i| simulate(net, code, f, &f.unit(n, i))).collect();
    (0..net.edge_count()).map(|e| (0..n).map(|i| cols[i][e]).collect()).collect()
}

/// Sorted source/terminal reach counts per node, by brute-force DFS.
pub fn brute_labels(net: &Network) -> Vec<(u32, u32)> {
    let down: Vec<Vec<bool>> = (0..net.node_count()).map(|v| downstream(net, v)).collect();
    (0..net.node_count())
        .map(|v| {
            let cs = net.sources().iter().filter(|&&s| down[s][v]).count() as u32;
            let ct = net.terminals().iter().filter(|&&t| down[v][t]).count() as u32;
            (cs, ct)
        })
        .collect()
}
