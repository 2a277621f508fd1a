mod common;

use proptest::prelude::*;
use sumcast::ff::{in_span_of, Elem, FfError, Field, FieldSpec, Matrix};

fn field(spec: &str) -> Field {
    spec.parse::<FieldSpec>().unwrap().build().unwrap()
}

fn row(f: &Field, xs: &[i64]) -> Vec<Elem> {
    xs.iter().map(|&x| f.from_i64(x)).collect()
}

#[test]
fn small_arithmetic() {
    let gf3 = field("prime:3");
    assert_eq!(gf3.add(gf3.from_i64(2), gf3.from_i64(2)), gf3.from_i64(1));
    let gf2 = field("prime:2");
    assert_eq!(gf2.add(gf2.one(), gf2.one()), gf2.zero());
    // x * x^2 = x^3 = x + 1 under x^3 + x + 1
    let gf8 = field("gf2m:3");
    let x = gf8.elem(0b010).unwrap();
    let x2 = gf8.elem(0b100).unwrap();
    assert_eq!(gf8.mul(x, x2), gf8.elem(0b011).unwrap());
}

#[test]
fn bad_specs_are_rejected() {
    assert!(matches!(FieldSpec::Prime(9).build(), Err(FfError::NotPrime(9))));
    assert!("prime:1".parse::<FieldSpec>().is_err());
    assert!("gf3:2".parse::<FieldSpec>().is_err());
    assert!("prime".parse::<FieldSpec>().is_err());
    assert_eq!("gf2m:8".parse::<FieldSpec>().unwrap().to_string(), "gf2m:8");
}

#[test]
fn axioms_hold_exhaustively() {
    for spec in ["prime:2", "prime:3", "prime:5", "gf2m:2", "gf2m:3"] {
        let f = field(spec);
        let all: Vec<Elem> = f.elements().collect();
        assert_eq!(all.len() as u32, f.order());
        for &a in &all {
            assert_eq!(f.add(a, f.zero()), a);
            assert_eq!(f.mul(a, f.one()), a);
            assert_eq!(f.add(a, f.neg(a)), f.zero());
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one(), "{spec}");
            } else {
                assert_eq!(f.inv(a), None);
            }
            for &b in &all {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for &c in &all {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)), "{spec}");
                }
            }
        }
    }
}

#[test]
fn rank_examples() {
    let gf3 = field("prime:3");
    assert_eq!(Matrix::identity(2).rank(&gf3), 2);
    let gf5 = field("prime:5");
    let m = Matrix::from_rows(2, &[row(&gf5, &[1, 2]), row(&gf5, &[2, 4])]).unwrap();
    assert_eq!(m.rank(&gf5), 1);
    let gf2 = field("prime:2");
    let m = Matrix::from_rows(2, &[row(&gf2, &[1, 1]), row(&gf2, &[1, 1])]).unwrap();
    assert_eq!(m.rank(&gf2), 1);
}

#[test]
fn span_examples() {
    let gf2 = field("prime:2");
    let span = in_span_of(&gf2, &gf2.ones(2), &[row(&gf2, &[1, 0]), row(&gf2, &[0, 1])]).unwrap();
    assert_eq!(span.coefficients(), Some(&row(&gf2, &[1, 1])[..]));

    let gf3 = field("prime:3");
    let span = in_span_of(&gf3, &gf3.ones(3), &[row(&gf3, &[2, 1, 0]), row(&gf3, &[0, 1, 2])]).unwrap();
    assert_eq!(span.coefficients(), Some(&row(&gf3, &[2, 2])[..]));

    for spec in ["prime:2", "prime:3", "prime:5", "prime:7", "gf2m:2", "gf2m:8"] {
        let f = field(spec);
        let rows = [row(&f, &[1, 1, 0]), row(&f, &[0, 1, 1])];
        assert!(!in_span_of(&f, &f.ones(3), &rows).unwrap().is_member(), "{spec}");
    }
}

#[test]
fn span_dimension_mismatch() {
    let gf3 = field("prime:3");
    assert!(in_span_of(&gf3, &gf3.ones(2), &[gf3.ones(3)]).is_err());
}

#[test]
fn determinant_of_table_pairs() {
    let gf3 = field("prime:3");
    let m = Matrix::from_rows(2, &[row(&gf3, &[2, 1]), row(&gf3, &[0, 1])]).unwrap();
    assert_eq!(m.determinant(&gf3).unwrap(), gf3.from_i64(2));
    let m = Matrix::from_rows(2, &[row(&gf3, &[1, 2]), row(&gf3, &[2, 1])]).unwrap();
    assert!(m.determinant(&gf3).unwrap().is_zero());
}

fn small_field() -> impl Strategy<Value = Field> {
    prop_oneof![
        Just("prime:2"),
        Just("prime:3"),
        Just("prime:5"),
        Just("prime:7"),
        Just("gf2m:2"),
        Just("gf2m:3"),
    ]
    .prop_map(field)
}

fn system() -> impl Strategy<Value = (Field, Vec<Vec<u32>>, Vec<u32>)> {
    (small_field(), 1usize..=3, 0usize..=3).prop_flat_map(|(f, cols, rows)| {
        let q = f.order();
        let vec = proptest::collection::vec(0..q, cols);
        (Just(f), proptest::collection::vec(vec.clone(), rows), vec)
    })
}

proptest! {
    #[test]
    fn in_span_matches_enumeration((f, raw_rows, raw_target) in system()) {
        let rows: Vec<Vec<Elem>> = raw_rows.iter().map(|r| r.iter().map(|&x| f.elem(x as u64).unwrap()).collect()).collect();
        let target: Vec<Elem> = raw_target.iter().map(|&x| f.elem(x as u64).unwrap()).collect();
        let span = in_span_of(&f, &target, &rows).unwrap();
        let brute = common::exhaustive_span(&f, &target, &rows);
        prop_assert_eq!(span.is_member(), brute.is_some());
        if let Some(c) = span.coefficients() {
            let mut acc = vec![f.zero(); target.len()];
            for (k, r) in c.iter().zip(&rows) {
                f.axpy(&mut acc, *k, r);
            }
            prop_assert_eq!(acc, target);
        }
    }

    #[test]
    fn rank_ignores_pivot_order((f, raw_rows, raw_target) in system()) {
        let cols = raw_target.len();
        let rows: Vec<Vec<Elem>> = raw_rows.iter().map(|r| r.iter().map(|&x| f.elem(x as u64).unwrap()).collect()).collect();
        let m = Matrix::from_rows(cols, &rows).unwrap();
        prop_assert_eq!(m.rank(&f), common::reverse_pivot_rank(&f, &rows));
    }
}
