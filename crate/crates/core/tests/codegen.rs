mod common;

use sumcast::codegen::{
    assign_3s_3t, assign_greedy_2s, assign_ns_2t, classify_3s3t, extract_one_path_subgraph, random_color_trial,
    table_one_vector, Branch, CodegenError,
};
use sumcast::decompose::{color_nodes, decompose};
use sumcast::ff::{in_span_of, Elem, Field, FieldSpec};
use sumcast::instances::{random_dag, structured_3s3t, two_color_random_fixture, DagShape, Family};
use sumcast::netgraph::{normalize, reachable_from, Network, NetworkBuilder};
use sumcast::verify::{check_sum_decodable, propagate};

fn gf(spec: &str) -> Field {
    spec.parse::<FieldSpec>().unwrap().build().unwrap()
}

fn vals(v: &[Elem]) -> Vec<u32> {
    v.iter().map(|x| x.value()).collect()
}

fn decodes_everywhere(net: &Network, code: &sumcast::code::CodeAssignment) -> bool {
    check_sum_decodable(net, code).unwrap().all_decodable
}

#[test]
fn greedy_two_paths_into_one_terminal() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let s2 = b.source(2);
    let t = b.terminal(1);
    b.edge(s1, t);
    b.edge(s2, t);
    let net = b.build().unwrap();
    let f = Field::gf3();
    let code = assign_greedy_2s(&net, &f).unwrap();
    let beta = propagate(&net, &code).unwrap();
    assert_eq!(vals(&beta[0]), vec![1, 0]);
    assert_eq!(vals(&beta[1]), vec![0, 1]);
    assert!(decodes_everywhere(&net, &code));
}

#[test]
fn greedy_output_is_union_of_supports() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let s2 = b.source(2);
    let v = b.internal("v");
    let w = b.internal("w");
    let u = b.internal("u");
    let t1 = b.terminal(1);
    let t2 = b.terminal(2);
    b.edge(s1, v);
    b.edge(s1, w);
    b.edge(s2, w);
    let in_a = b.edge(v, u);
    let in_b = b.edge(w, u);
    let out = b.edge(u, t1);
    b.edge(w, t2);
    let net = b.build().unwrap();
    let code = assign_greedy_2s(&net, &Field::gf3()).unwrap();
    let beta = common::unit_columns(&net, &code, &Field::gf3());
    assert_eq!(vals(&beta[in_a]), vec![1, 0]);
    assert_eq!(vals(&beta[in_b]), vec![1, 1]);
    assert_eq!(vals(&beta[out]), vec![1, 1]);
}

#[test]
fn greedy_names_the_disconnected_pair() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let _s2 = b.source(2);
    let t = b.terminal(1);
    b.edge(s1, t);
    let err = assign_greedy_2s(&b.build().unwrap(), &Field::gf3()).unwrap_err();
    assert_eq!(err, CodegenError::Connectivity { s: 2, t: 1, found: 0, needed: 1 });
}

#[test]
fn greedy_vectors_follow_reachability() {
    let f = Field::gf3();
    for seed in 0..40 {
        let t = 2 + (seed as usize % 3);
        let net = normalize(&random_dag(DagShape::new(2, t), seed)).network;
        let code = assign_greedy_2s(&net, &f).unwrap();
        assert!(common::replay_decodable(&net, &code, &f).iter().all(|&ok| ok), "seed {seed}");
        let beta = common::unit_columns(&net, &code, &f);
        let below: Vec<Vec<bool>> = net.sources().iter().map(|&s| reachable_from(&net, &[s], None)).collect();
        for e in net.edges() {
            for i in 0..2 {
                let expect = u32::from(below[i][e.tail]);
                assert_eq!(beta[e.id][i].value(), expect, "seed {seed} edge {}", e.id);
            }
        }
    }
}

fn minimal_and_unique(net: &Network, edges: &sumcast::netgraph::EdgeSet) {
    for &s in net.sources() {
        for &t in net.terminals() {
            assert_eq!(common::dfs_path_count_in(net, s, t, &|e| edges.contains(e)), 1);
        }
    }
    for e in edges.iter() {
        let broken = net.sources().iter().any(|&s| {
            net.terminals().iter().any(|&t| common::dfs_path_count_in(net, s, t, &|x| x != e && edges.contains(x)) == 0)
        });
        assert!(broken, "edge {e} is removable");
    }
}

#[test]
fn single_source_crossing_paths_share_a_prefix() {
    // two crossing routes: s -> a -> {x, y} -> {t1, t2} with both crossings
    let mut b = NetworkBuilder::new();
    let s = b.source(1);
    let a = b.internal("a");
    let x = b.internal("x");
    let y = b.internal("y");
    let t1 = b.terminal(1);
    let t2 = b.terminal(2);
    b.edge(s, a);
    b.edge(a, x);
    b.edge(a, y);
    b.edge(x, t1);
    b.edge(x, t2);
    b.edge(y, t1);
    b.edge(y, t2);
    let net = b.build().unwrap();
    let sub = extract_one_path_subgraph(&net).unwrap();
    minimal_and_unique(&net, &sub.edges);
    assert!(sub.edges.contains(0));
}

#[test]
fn two_source_diamond_has_one_path_per_pair() {
    let mut b = NetworkBuilder::new();
    let s1 = b.source(1);
    let s2 = b.source(2);
    let m = b.internal("m");
    let l = b.internal("l");
    let r = b.internal("r");
    let t1 = b.terminal(1);
    let t2 = b.terminal(2);
    b.edge(s1, m);
    b.edge(s2, m);
    b.edge(m, l);
    b.edge(m, r);
    b.edge(l, t1);
    b.edge(r, t2);
    b.edge(l, t2);
    b.edge(s1, t1);
    let net = b.build().unwrap();
    let sub = extract_one_path_subgraph(&net).unwrap();
    assert_eq!(sub.path_counts(&net), vec![vec![1, 1], vec![1, 1]]);
    minimal_and_unique(&net, &sub.edges);
    let f = Field::gf3();
    let code = assign_ns_2t(&net, &f).unwrap();
    let beta = propagate(&net, &code).unwrap();
    for &t in net.terminals() {
        let mut total = vec![f.zero(); 2];
        for &e in net.in_edges(t) {
            f.axpy(&mut total, f.one(), &beta[e]);
        }
        assert_eq!(total, f.ones(2));
    }
}

#[test]
fn shared_middle_edge_carries_a_partial_sum() {
    let mut b = NetworkBuilder::new();
    let s: Vec<_> = (1..=3).map(|i| b.source(i)).collect();
    let m = b.internal("m");
    let n = b.internal("n");
    let t1 = b.terminal(1);
    let t2 = b.terminal(2);
    b.edge(s[0], m);
    b.edge(s[1], m);
    let mid = b.edge(m, n);
    b.edge(s[2], n);
    b.edge(n, t1);
    b.edge(n, t2);
    let net = b.build().unwrap();
    let f = Field::gf3();
    let code = assign_ns_2t(&net, &f).unwrap();
    let beta = propagate(&net, &code).unwrap();
    assert_eq!(vals(&beta[mid]), vec![1, 1, 0]);
    assert!(decodes_everywhere(&net, &code));
}

#[test]
fn ns2t_on_random_five_source_networks() {
    let f = Field::gf3();
    for seed in 0..15 {
        let net = normalize(&random_dag(DagShape { extra_edges: 12, ..DagShape::new(5, 2) }, seed)).network;
        let sub = extract_one_path_subgraph(&net).unwrap();
        for row in sub.path_counts(&net) {
            assert_eq!(row, vec![1, 1]);
        }
        let code = assign_ns_2t(&net, &f).unwrap();
        assert!(common::replay_decodable(&net, &code, &f).iter().all(|&ok| ok), "seed {seed}");
    }
}

#[test]
fn table_vectors() {
    let f = Field::gf3();
    assert_eq!(vals(&table_one_vector(&f, [0, 1]).unwrap()), vec![2, 1, 0]);
    let pairs = [[0, 1], [1, 2], [0, 2]];
    for a in 0..3 {
        for b in a + 1..3 {
            let rows = vec![table_one_vector(&f, pairs[a]).unwrap(), table_one_vector(&f, pairs[b]).unwrap()];
            assert!(in_span_of(&f, &f.ones(3), &rows).unwrap().is_member());
            assert!(common::exhaustive_span(&f, &f.ones(3), &rows).is_some());
        }
    }
    let gf4 = gf("gf2m:2");
    assert!(matches!(table_one_vector(&gf4, [0, 1]), Err(CodegenError::Characteristic(_))));
}

#[test]
fn star_goes_through_case_zero() {
    let mut b = NetworkBuilder::new();
    let s: Vec<_> = (1..=3).map(|i| b.source(i)).collect();
    let v = b.internal("v");
    let t: Vec<_> = (1..=3).map(|j| b.terminal(j)).collect();
    let (l, w, r) = (b.internal("l"), b.internal("w"), b.internal("r"));
    // merge into v, then split, keeping every internal degree at 3
    b.edge(s[0], l);
    b.edge(s[1], l);
    b.edge(l, v);
    b.edge(s[2], v);
    b.edge(v, w);
    b.edge(w, r);
    b.edge(w, t[2]);
    b.edge(r, t[0]);
    b.edge(r, t[1]);
    for &x in &s {
        for &y in &t {
            b.edge(x, y);
        }
    }
    let net = b.build().unwrap();
    assert_eq!(classify_3s3t(&net).unwrap(), Branch::Case0);
    let out = assign_3s_3t(&net, &Field::gf3(), 0, 1).unwrap();
    assert_eq!(out.branch, Branch::Case0);
    assert!(decodes_everywhere(&net, &out.code));
}

#[test]
fn every_family_lands_in_its_branch_and_decodes() {
    for family in Family::ALL {
        for seed in 0..3 {
            let net = structured_3s3t(family, seed);
            let branch = classify_3s3t(&net).unwrap();
            let f = if branch.is_random() { gf("gf2m:8") } else { Field::gf3() };
            let out = assign_3s_3t(&net, &f, seed, 32).unwrap();
            assert_eq!(out.branch, branch);
            assert!(decodes_everywhere(&net, &out.code), "{family:?} seed {seed}");
        }
    }
}

#[test]
fn gf3_codes_survive_numeric_replay() {
    for family in Family::ALL {
        let net = structured_3s3t(family, 5);
        if classify_3s3t(&net).unwrap().is_random() {
            continue;
        }
        let f = Field::gf3();
        let out = assign_3s_3t(&net, &f, 0, 1).unwrap();
        assert!(common::replay_decodable(&net, &out.code, &f).iter().all(|&ok| ok), "{family:?}");
    }
}

#[test]
fn one_color_outsider_uses_singletons() {
    for seed in 0..4 {
        let net = structured_3s3t(Family::OneColor, seed);
        let d = decompose(&net).unwrap();
        let c = color_nodes(&net, &d.reach, &d.labels).unwrap();
        assert_eq!(c.palette.len(), 1);
        let outsider = (0..3).find(|j| !c.palette[0].terminals.contains(j)).unwrap();
        assert!(d.leaves[outsider].iter().all(|&u| d.labels[u].cs == 1));
        let out = assign_3s_3t(&net, &Field::gf3(), 0, 1).unwrap();
        assert_eq!(out.branch, Branch::OneColor);
        let rep = check_sum_decodable(&net, &out.code).unwrap();
        assert!(rep.terminals[outsider].decodable);
    }
}

#[test]
fn zero_colors_branch() {
    let net = structured_3s3t(Family::NoColors, 1);
    let out = assign_3s_3t(&net, &Field::gf3(), 0, 1).unwrap();
    assert_eq!(out.branch, Branch::NoColors);
    assert!(decodes_everywhere(&net, &out.code));
}

#[test]
fn table_branches_need_odd_characteristic() {
    let net = structured_3s3t(Family::TwoSameTerminals, 0);
    let err = assign_3s_3t(&net, &gf("gf2m:8"), 0, 1).unwrap_err();
    assert!(matches!(err, CodegenError::Characteristic(_)));
}

#[test]
fn random_branch_on_fixture() {
    let net = two_color_random_fixture();
    assert_eq!(classify_3s3t(&net).unwrap(), Branch::TwoColorsRandom);
    let f = gf("gf2m:8");
    let out = assign_3s_3t(&net, &f, 7, 32).unwrap();
    assert!(out.attempts >= 1);
    assert!(decodes_everywhere(&net, &out.code));
}

#[test]
fn rejected_draw_is_resampled() {
    // a tiny field makes bad draws common
    let net = two_color_random_fixture();
    let f = gf("gf2m:2");
    let seed = (0..200u64).find(|&s| !random_color_trial(&net, &f, s).unwrap().succeeded()).expect("some draw fails over GF(4)");
    let trial = random_color_trial(&net, &f, seed).unwrap();
    assert!(trial.failure.is_some());
    match assign_3s_3t(&net, &f, seed, 64) {
        Ok(out) => {
            assert!(out.attempts >= 2);
            assert!(decodes_everywhere(&net, &out.code));
        }
        Err(CodegenError::RetriesExhausted { attempts, .. }) => assert_eq!(attempts, 64),
        Err(e) => panic!("unexpected error {e}"),
    }
    let err = assign_3s_3t(&net, &f, seed, 1).unwrap_err();
    assert!(matches!(err, CodegenError::RetriesExhausted { attempts: 1, .. }));
}

#[test]
fn identical_inputs_give_identical_codes() {
    let net = two_color_random_fixture();
    let f = gf("gf2m:8");
    let a = assign_3s_3t(&net, &f, 3, 32).unwrap();
    let b = assign_3s_3t(&net, &f, 3, 32).unwrap();
    assert_eq!(a, b);
    let net = structured_3s3t(Family::ManyColors, 2);
    assert_eq!(assign_3s_3t(&net, &Field::gf3(), 0, 1), assign_3s_3t(&net, &Field::gf3(), 9, 1));
}

#[test]
fn three_by_three_needs_vertex_disjoint_pairs() {
    let mut b = NetworkBuilder::new();
    let s: Vec<_> = (1..=3).map(|i| b.source(i)).collect();
    let t: Vec<_> = (1..=3).map(|j| b.terminal(j)).collect();
    for &x in &s {
        for &y in &t {
            b.edge(x, y);
        }
    }
    let net = b.build().unwrap();
    assert!(matches!(assign_3s_3t(&net, &Field::gf3(), 0, 1), Err(CodegenError::Connectivity { needed: 2, .. })));
}
