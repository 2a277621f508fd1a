mod common;

use sumcast::decompose::{
    build_aux, color_nodes, decompose, dispatch, report, Case, Color, EdgeClass, Label,
};
use sumcast::instances::{counterexample_3s3t, random_dag, structured_3s3t, two_color_random_fixture, DagShape, Family};
use sumcast::netgraph::{disjoint_paths, normalize, Disjointness, Network, NetworkBuilder};

fn full_mesh() -> Network {
    let mut b = NetworkBuilder::new();
    let ss: Vec<_> = (1..=3).map(|i| b.source(i)).collect();
    let ts: Vec<_> = (1..=3).map(|j| b.terminal(j)).collect();
    for &s in &ss {
        for &t in &ts {
            b.edge(s, t);
        }
    }
    b.build().unwrap()
}

#[test]
fn endpoint_labels_in_connected_network() {
    let net = full_mesh();
    let d = decompose(&net).unwrap();
    for &s in net.sources() {
        assert_eq!(d.labels[s], Label { cs: 1, ct: 3 });
    }
    for &t in net.terminals() {
        assert_eq!(d.labels[t], Label { cs: 3, ct: 1 });
    }
}

#[test]
fn demo_topology_labels_and_classes() {
    let net = counterexample_3s3t();
    let d = decompose(&net).unwrap();
    for name in ["r1", "m1", "r2", "m2"] {
        assert_eq!(d.labels[net.find(name).unwrap()], Label { cs: 2, ct: 2 }, "{name}");
    }
    let m1 = net.find("m1").unwrap();
    let t3 = net.find("t3").unwrap();
    let into_t3 = net.out_edges(m1).iter().copied().find(|&e| net.edge(e).head == t3).unwrap();
    assert_eq!(d.classes[into_t3], EdgeClass::Terminal(2));
    for e in net.edges() {
        if net.terminal_pos(e.head).is_some() {
            assert!(matches!(d.classes[e.id], EdgeClass::Terminal(_)));
        }
    }
    d.check_structure(&net).unwrap();
}

#[test]
fn edge_between_wide_nodes_is_remaining() {
    let mut b = NetworkBuilder::new();
    let ss: Vec<_> = (1..=3).map(|i| b.source(i)).collect();
    let u = b.internal("u");
    let w = b.internal("w");
    let ts: Vec<_> = (1..=3).map(|j| b.terminal(j)).collect();
    for &s in &ss {
        b.edge(s, u);
    }
    let mid = b.edge(u, w);
    for &t in &ts {
        b.edge(w, t);
    }
    let net = b.build().unwrap();
    let d = decompose(&net).unwrap();
    assert_eq!(d.classes[mid], EdgeClass::Remaining);
    assert_eq!(dispatch(&net, &d.labels), Case::Node33(u));
}

#[test]
fn leaf_examples() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let s2 = b.source(2);
    let a = b.internal("a");
    let v = b.internal("v");
    let p = b.internal("p");
    let t1 = b.terminal(1);
    let t2 = b.terminal(2);
    b.edge(s1, a);
    b.edge(a, t1);
    b.edge(s1, v);
    b.edge(s2, v);
    b.edge(v, p);
    b.edge(p, t1);
    b.edge(v, t2);
    b.edge(s2, t2);
    b.edge(s1, t2);
    let net = b.build().unwrap();
    let d = decompose(&net).unwrap();
    assert_eq!(d.labels[a], Label { cs: 1, ct: 1 });
    assert!(d.leaves[0].contains(&s1));
    assert!(d.leaves[0].contains(&v));
    assert!(!d.leaves[0].contains(&a));
    assert!(!d.leaves[0].contains(&p));
}

#[test]
fn two_color_fixture_leaves_on_private_paths() {
    let net = two_color_random_fixture();
    let d = decompose(&net).unwrap();
    let c = color_nodes(&net, &d.reach, &d.labels).unwrap();
    assert_eq!(c.palette.len(), 2);
    let shared_t = 1;
    for &s in [net.sources()[0], net.sources()[2]].iter() {
        let ps = disjoint_paths(&net, s, net.terminals()[shared_t], 2, Disjointness::Vertex).unwrap();
        for p in &ps.paths {
            let leaf = d.leaf_on_path(&net, p).unwrap();
            assert!(d.leaves[shared_t].contains(&leaf));
            let l = d.labels[leaf];
            assert!(l == Label { cs: 2, ct: 2 } || l.cs == 1, "leaf {} labeled {l:?}", net.name(leaf));
        }
    }
}

#[test]
fn color_of_a_merge_split_node() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let s2 = b.source(2);
    let v = b.internal("v");
    let t1 = b.terminal(1);
    let t2 = b.terminal(2);
    b.edge(s1, v);
    b.edge(s2, v);
    b.edge(v, t1);
    b.edge(v, t2);
    let net = b.build().unwrap();
    let d = decompose(&net).unwrap();
    let c = color_nodes(&net, &d.reach, &d.labels).unwrap();
    assert_eq!(c.palette, vec![Color { sources: [0, 1], terminals: [0, 1] }]);
    assert_eq!(c.node_color[v], Some(0));
    assert_eq!(build_aux(&net, &c, &d.leaves).unwrap().degrees, vec![1, 1]);
}

#[test]
fn no_merges_means_no_colors() {
    let net = full_mesh();
    let d = decompose(&net).unwrap();
    let c = color_nodes(&net, &d.reach, &d.labels).unwrap();
    assert!(c.palette.is_empty());
    assert_eq!(build_aux(&net, &c, &d.leaves).unwrap().sequence, vec![0, 0, 0]);
}

#[test]
fn degree_sequences_of_three_color_families() {
    for (family, seq) in [
        (Family::ThreeColors033, vec![0, 3, 3]),
        (Family::ThreeColors222(1), vec![2, 2, 2]),
        (Family::ThreeColors222(3), vec![2, 2, 2]),
        (Family::ThreeColors123, vec![1, 2, 3]),
    ] {
        for seed in 0..3 {
            let net = structured_3s3t(family, seed);
            let d = decompose(&net).unwrap();
            let c = color_nodes(&net, &d.reach, &d.labels).unwrap();
            assert_eq!(c.palette.len(), 3);
            assert_eq!(build_aux(&net, &c, &d.leaves).unwrap().sequence, seq, "{family:?}");
        }
    }
}

#[test]
fn structural_invariants_on_every_family() {
    for family in Family::ALL {
        for seed in 0..4 {
            let net = structured_3s3t(family, seed);
            let d = decompose(&net).unwrap();
            d.check_structure(&net).unwrap();
            for e in net.edges() {
                if d.classes[e.id] == EdgeClass::Remaining {
                    assert!(d.labels[e.head].ct >= 2);
                }
            }
            if dispatch(&net, &d.labels) != Case::Colors {
                continue;
            }
            let c = color_nodes(&net, &d.reach, &d.labels).unwrap();
            for e in net.edges() {
                if let (Some(a), Some(b)) = (c.node_color[e.tail], c.node_color[e.head]) {
                    assert_eq!(a, b);
                }
            }
            // every terminal of a color has a leaf of that color
            for (k, color) in c.palette.iter().enumerate() {
                for &j in &color.terminals {
                    assert!(d.leaves[j].iter().any(|&u| c.node_color[u] == Some(k)), "{family:?} {color}");
                }
            }
            assert!(build_aux(&net, &c, &d.leaves).is_ok());
        }
    }
}

#[test]
fn labels_match_brute_force_and_leaves_are_wide() {
    for seed in 0..30 {
        let shape = DagShape { max_nodes: 15, ..DagShape::new(3, 3) };
        let net = normalize(&random_dag(shape, seed)).network;
        let d = decompose(&net).unwrap();
        let brute = common::brute_labels(&net);
        for v in 0..net.node_count() {
            assert_eq!((d.labels[v].cs, d.labels[v].ct), brute[v]);
        }
        for leaves in &d.leaves {
            for &u in leaves {
                assert!(d.labels[u].ct >= 2 || net.source_pos(u).is_some());
            }
        }
        d.check_structure(&net).unwrap();
    }
}

#[test]
fn report_serializes() {
    let rep = report(&structured_3s3t(Family::ThreeColors222(2), 0)).unwrap();
    let json = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["degree_sequence"], serde_json::json!([2, 2, 2]));
    assert_eq!(json["dispatch"]["case"], "colors");
}
