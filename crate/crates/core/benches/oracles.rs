use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sumcast::codegen::random_color_trial;
use sumcast::exec::Exec;
use sumcast::ff::FieldSpec;
use sumcast::instances::{counterexample_3s3t, counterexample_3s3t_plus, two_color_random_fixture};
use sumcast::verify::{exhaustive_code_search, vector_2s2t_oracle, Enumeration, SEARCH_LIMIT};

const MODES: [(&str, Exec); 2] = [("seq", Exec::Seq), ("par", Exec::Par)];

fn search(c: &mut Criterion) {
    let f = FieldSpec::Prime(2).build().unwrap();
    let mut g = c.benchmark_group("exhaustive_search_gf2");
    g.sample_size(10);
    for (name, net) in [("infeasible", counterexample_3s3t()), ("feasible", counterexample_3s3t_plus())] {
        for (mode, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, mode), &exec, |b, &exec| {
                b.iter(|| exhaustive_code_search(black_box(&net), &f, SEARCH_LIMIT, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn vector(c: &mut Criterion) {
    let mut g = c.benchmark_group("vector_oracle_full");
    g.sample_size(10);
    for spec in [FieldSpec::Prime(2), FieldSpec::Prime(3)] {
        let f = spec.build().unwrap();
        for (mode, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(spec.to_string(), mode), &exec, |b, &exec| {
                b.iter(|| vector_2s2t_oracle(black_box(&f), false, Enumeration::Full, exec))
            });
        }
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let net = two_color_random_fixture();
    let f = FieldSpec::Binary(8).build().unwrap();
    let seeds: Vec<u64> = (0..256).collect();
    let mut g = c.benchmark_group("random_two_color_256_draws");
    for (mode, exec) in MODES {
        g.bench_function(mode, |b| {
            b.iter(|| exec.map(&seeds, |&s| random_color_trial(&net, &f, s).unwrap().succeeded()).len())
        });
    }
    g.finish();
}

criterion_group!(benches, search, vector, monte_carlo);
criterion_main!(benches);
