mod common;

use sumcast::codegen::{assign_3s_3t, assign_greedy_2s};
use sumcast::ff::Field;
use sumcast::instances::{random_dag, DagShape};
use sumcast::netgraph::{max_flow, normalize, reachable_from, vertex_max_flow, Network, NetworkBuilder};
use sumcast::transform::{endpoints_preserved, lift_code, reduce_degrees, TransformError};
use sumcast::verify::check_sum_decodable;

fn star(sources: usize, terminals: usize) -> Network {
    let mut b = NetworkBuilder::new();
    let ss: Vec<_> = (1..=sources).map(|i| b.source(i)).collect();
    let v = b.internal("v");
    let ts: Vec<_> = (1..=terminals).map(|j| b.terminal(j)).collect();
    for &s in &ss {
        b.edge(s, v);
        b.edge(s, v);
    }
    for &t in &ts {
        b.edge(v, t);
        b.edge(v, t);
    }
    b.build().unwrap()
}

fn acyclic(net: &Network) -> bool {
    net.edges().iter().all(|e| !reachable_from(net, &[e.head], None)[e.tail])
}

#[test]
fn every_in_link_reaches_every_out_link() {
    let net = star(3, 3);
    let red = reduce_degrees(&net).unwrap();
    let r = &red.reduced;
    assert!(r.max_internal_degree() <= 3);
    assert!(acyclic(r));
    assert!(endpoints_preserved(&red));
    let v = net.find("v").unwrap();
    for &i in net.in_edges(v) {
        let below = reachable_from(r, &[r.edge(red.edge_map[i]).head], None);
        for &o in net.out_edges(v) {
            assert!(below[r.edge(red.edge_map[o]).tail], "in-link {i} reaches out-link {o}");
        }
    }
}

#[test]
fn low_degree_network_is_unchanged() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let s2 = b.source(2);
    let v = b.internal("v");
    let t = b.terminal(1);
    b.edge(s1, v);
    b.edge(s2, v);
    b.edge(v, t);
    let net = b.build().unwrap();
    let red = reduce_degrees(&net).unwrap();
    assert!(red.is_identity());
    assert_eq!(red.reduced, net);
    let f = Field::gf3();
    let code = assign_greedy_2s(&net, &f).unwrap();
    assert_eq!(lift_code(&red, &code).unwrap(), code);
}

#[test]
fn edge_flow_two_becomes_vertex_flow_two() {
    let net = star(3, 3);
    let red = reduce_degrees(&net).unwrap();
    for (&s, &rs) in net.sources().iter().zip(red.reduced.sources()) {
        for (&t, &rt) in net.terminals().iter().zip(red.reduced.terminals()) {
            assert_eq!(max_flow(&net, s, t), 2);
            assert!(vertex_max_flow(&red.reduced, rs, rt) >= 2);
        }
    }
}

#[test]
fn greedy_code_lifts_through_a_gadget() {
    let net = star(2, 3);
    let red = reduce_degrees(&net).unwrap();
    assert!(!red.is_identity());
    let f = Field::gf3();
    let code = assign_greedy_2s(&red.reduced, &f).unwrap();
    let lifted = lift_code(&red, &code).unwrap();
    assert!(check_sum_decodable(&net, &lifted).unwrap().all_decodable);
    assert!(common::replay_decodable(&net, &lifted, &f).iter().all(|&ok| ok));
}

#[test]
fn case_zero_code_lifts_from_star() {
    let net = star(3, 3);
    let red = reduce_degrees(&net).unwrap();
    let f = Field::gf3();
    let out = assign_3s_3t(&red.reduced, &f, 0, 1).unwrap();
    let lifted = lift_code(&red, &out.code).unwrap();
    assert!(check_sum_decodable(&net, &lifted).unwrap().all_decodable);
}

#[test]
fn refuses_infeasible_or_foreign_codes() {
    let net = star(2, 2);
    let red = reduce_degrees(&net).unwrap();
    let f = Field::gf3();
    let zero = sumcast::code::CodeAssignment::zero(f.spec(), red.reduced.edge_count());
    assert_eq!(lift_code(&red, &zero), Err(TransformError::Infeasible));
    let short = sumcast::code::CodeAssignment::zero(f.spec(), 1);
    assert_eq!(lift_code(&red, &short), Err(TransformError::Mismatch));
}

#[test]
fn rejects_unnormalized_input() {
    let mut b = NetworkBuilder::new();
    let s = b.source(1);
    let t = b.terminal(1);
    b.edge_with_capacity(s, t, 2);
    assert_eq!(reduce_degrees(&b.build().unwrap()), Err(TransformError::NotNormalized));
}

#[test]
fn random_networks_keep_flow_correspondence() {
    for seed in 0..20 {
        let shape = DagShape { routes: 2, wide_edges: 0.3, extra_edges: 12, ..DagShape::new(2, 3) };
        let net = normalize(&random_dag(shape, seed)).network;
        let red = reduce_degrees(&net).unwrap();
        assert!(red.reduced.max_internal_degree() <= 3);
        assert!(acyclic(&red.reduced));
        for (&s, &rs) in net.sources().iter().zip(red.reduced.sources()) {
            for (&t, &rt) in net.terminals().iter().zip(red.reduced.terminals()) {
                assert!(vertex_max_flow(&red.reduced, rs, rt) >= max_flow(&net, s, t).min(2), "seed {seed}");
            }
        }
    }
}
