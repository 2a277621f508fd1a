//! Finite fields GF(p) and GF(2^m) with the small dense linear algebra the
//! verifiers rely on (rank, span membership, determinants).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("prime modulus {0} is too large (must be below 2^31)")]
    PrimeTooLarge(u64),
    #[error("extension degree {0} is outside 1..=16")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#x} is reducible over GF(2)")]
    Reducible { poly: u32 },
    #[error("invalid field spec `{0}` (expected `prime:<p>` or `gf2m:<m>`)")]
    BadSpec(String),
    #[error("value {value} is not a canonical element of {field}")]
    NotCanonical { value: u64, field: FieldSpec },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
}

/// Irreducible reduction polynomials for GF(2^m), indexed by `m`, with the
/// x^m term included. Fixed so that results are reproducible bit for bit.
const BINARY_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1002D,
];

/// Which field to build: `prime:<p>` or `gf2m:<m>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Prime(u32),
    Binary(u32),
}

impl FieldSpec {
    pub fn build(self) -> Result<Field, FfError> {
        Field::new(self)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "prime:{p}"),
            FieldSpec::Binary(m) => write!(f, "gf2m:{m}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FfError::BadSpec(s.to_string());
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        let arg: u64 = arg.trim().parse().map_err(|_| bad())?;
        let spec = match kind.trim() {
            "prime" => FieldSpec::Prime(u32::try_from(arg).map_err(|_| FfError::PrimeTooLarge(arg))?),
            "gf2m" => FieldSpec::Binary(u32::try_from(arg).map_err(|_| FfError::UnsupportedDegree(u32::MAX))?),
            _ => return Err(bad()),
        };
        // Validate eagerly so a parsed spec always builds.
        Field::new(spec)?;
        Ok(spec)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A field element in canonical form: a residue below `p`, or the bit
/// vector of a GF(2^m) polynomial of degree below `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Prime { p: u32 },
    Binary { m: u32, poly: u32 },
}

/// Arithmetic context for one finite field. Cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    spec: FieldSpec,
    kind: Kind,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Exhaustive factor test: a degree-m polynomial is irreducible iff no
/// polynomial of degree 1..=m/2 divides it.
fn is_irreducible(poly: u32) -> bool {
    let m = poly_degree(poly);
    if m < 1 {
        return false;
    }
    for d in 1..=m / 2 {
        for cand in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(poly, cand) == 0 {
                return false;
            }
        }
    }
    true
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self, FfError> {
        let kind = match spec {
            FieldSpec::Prime(p) => {
                if u64::from(p) >= 1 << 31 {
                    return Err(FfError::PrimeTooLarge(p.into()));
                }
                if !is_prime(p.into()) {
                    return Err(FfError::NotPrime(p.into()));
                }
                Kind::Prime { p }
            }
            FieldSpec::Binary(m) => {
                if !(1..=16).contains(&m) {
                    return Err(FfError::UnsupportedDegree(m));
                }
                let poly = BINARY_POLYS[m as usize];
                if !is_irreducible(poly) {
                    return Err(FfError::Reducible { poly });
                }
                Kind::Binary { m, poly }
            }
        };
        Ok(Field { spec, kind })
    }

    /// GF(3), the default field for the three-source constructions.
    pub fn gf3() -> Self {
        Field::new(FieldSpec::Prime(3)).expect("3 is prime")
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    /// Number of elements.
    pub fn order(&self) -> u32 {
        match self.kind {
            Kind::Prime { p } => p,
            Kind::Binary { m, .. } => 1 << m,
        }
    }

    pub fn characteristic(&self) -> u32 {
        match self.kind {
            Kind::Prime { p } => p,
            Kind::Binary { .. } => 2,
        }
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// Checked constructor from a canonical representative.
    pub fn elem(&self, value: u64) -> Result<Elem, FfError> {
        if value < u64::from(self.order()) {
            Ok(Elem(value as u32))
        } else {
            Err(FfError::NotCanonical { value, field: self.spec })
        }
    }

    /// The image of the integer `n` under Z -> F (i.e. `n * 1`).
    pub fn from_i64(&self, n: i64) -> Elem {
        let c = i64::from(self.characteristic());
        Elem(n.rem_euclid(c) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order()).map(Elem)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match self.kind {
            Kind::Prime { p } => Elem(((u64::from(a.0) + u64::from(b.0)) % u64::from(p)) as u32),
            Kind::Binary { .. } => Elem(a.0 ^ b.0),
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        match self.kind {
            Kind::Prime { p } if a.0 != 0 => Elem(p - a.0),
            _ => a,
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match self.kind {
            Kind::Prime { p } => Elem(((u64::from(a.0) * u64::from(b.0)) % u64::from(p)) as u32),
            Kind::Binary { m, poly } => {
                let (mut x, mut y, mut acc) = (a.0, b.0, 0u32);
                while y != 0 {
                    if y & 1 == 1 {
                        acc ^= x;
                    }
                    y >>= 1;
                    x <<= 1;
                    if x & (1 << m) != 0 {
                        x ^= poly;
                    }
                }
                Elem(acc)
            }
        }
    }

    pub fn pow(&self, mut base: Elem, mut exp: u64) -> Elem {
        let mut acc = Elem::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, u64::from(self.order()) - 2))
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `acc + c * x`, the workhorse of every propagation loop.
    pub fn mul_add(&self, acc: Elem, c: Elem, x: Elem) -> Elem {
        self.add(acc, self.mul(c, x))
    }

    /// Adds `c * src` into `dst` elementwise.
    pub fn axpy(&self, dst: &mut [Elem], c: Elem, src: &[Elem]) {
        if c.is_zero() {
            return;
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = self.mul_add(*d, c, s);
        }
    }

    pub fn ones(&self, n: usize) -> Vec<Elem> {
        vec![Elem::ONE; n]
    }

    pub fn unit(&self, n: usize, i: usize) -> Vec<Elem> {
        let mut v = vec![Elem::ZERO; n];
        v[i] = Elem::ONE;
        v
    }
}

/// Dense row-major matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    /// An empty matrix with a fixed column count, to be filled with `push_row`.
    pub fn with_cols(cols: usize) -> Self {
        Matrix { rows: 0, cols, data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    pub fn from_rows<R: AsRef<[Elem]>>(cols: usize, rows: &[R]) -> Result<Self, FfError> {
        let mut m = Matrix::with_cols(cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[Elem]) -> Result<(), FfError> {
        if row.len() != self.cols {
            return Err(FfError::DimensionMismatch { expected: self.cols, found: row.len() });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Result<Matrix, FfError> {
        if self.cols != other.rows {
            return Err(FfError::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = f.mul_add(out.get(r, c), a, other.get(k, c));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// In-place reduction to reduced row echelon form. Pivots are taken
    /// column by column, choosing the first row (in current order) with a
    /// nonzero entry. Returns the pivot columns in order.
    pub fn reduce(&mut self, f: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..self.cols {
            if top == self.rows {
                break;
            }
            let Some(p) = (top..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(top, p);
            let inv = f.inv(self.get(top, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                let v = f.mul(self.get(top, c), inv);
                self.set(top, c, v);
            }
            for r in 0..self.rows {
                if r == top {
                    continue;
                }
                let factor = self.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                let neg = f.neg(factor);
                for c in 0..self.cols {
                    let v = f.mul_add(self.get(r, c), neg, self.get(top, c));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            top += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.clone().reduce(f).len()
    }

    pub fn determinant(&self, f: &Field) -> Result<Elem, FfError> {
        if self.rows != self.cols {
            return Err(FfError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Elem::ONE;
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Ok(Elem::ZERO);
            };
            if p != col {
                m.swap_rows(p, col);
                det = f.neg(det);
            }
            let pivot = m.get(col, col);
            det = f.mul(det, pivot);
            let inv = f.inv(pivot).expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = f.mul(m.get(r, col), inv);
                if factor.is_zero() {
                    continue;
                }
                let neg = f.neg(factor);
                for c in col..n {
                    let v = f.mul_add(m.get(r, c), neg, m.get(col, c));
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }
}

/// Outcome of a span-membership query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Span {
    /// `target = sum_i coeffs[i] * rows[i]`.
    Member(Vec<Elem>),
    /// Certified by rank: appending the target raises the rank.
    Outside { rank: usize, augmented_rank: usize },
}

impl Span {
    pub fn is_member(&self) -> bool {
        matches!(self, Span::Member(_))
    }

    pub fn coefficients(&self) -> Option<&[Elem]> {
        match self {
            Span::Member(c) => Some(c),
            Span::Outside { .. } => None,
        }
    }
}

/// Decides whether `target` lies in the row space of `rows`, returning a
/// reproducing combination when it does. Free variables are set to zero.
pub fn in_span(f: &Field, target: &[Elem], rows: &Matrix) -> Result<Span, FfError> {
    if target.len() != rows.cols() {
        return Err(FfError::DimensionMismatch { expected: rows.cols(), found: target.len() });
    }
    let k = rows.rows();
    // Solve R^T c = t on the augmented system [R^T | t].
    let mut aug = Matrix::zeros(rows.cols(), k + 1);
    for r in 0..k {
        for c in 0..rows.cols() {
            aug.set(c, r, rows.get(r, c));
        }
    }
    for (c, &t) in target.iter().enumerate() {
        aug.set(c, k, t);
    }
    let pivots = aug.reduce(f);
    if pivots.last() == Some(&k) {
        return Ok(Span::Outside { rank: pivots.len() - 1, augmented_rank: pivots.len() });
    }
    let mut coeffs = vec![Elem::ZERO; k];
    for (i, &col) in pivots.iter().enumerate() {
        coeffs[col] = aug.get(i, k);
    }
    Ok(Span::Member(coeffs))
}

/// Convenience wrapper over a list of row vectors.
pub fn in_span_of(f: &Field, target: &[Elem], rows: &[Vec<Elem>]) -> Result<Span, FfError> {
    let m = Matrix::from_rows(target.len(), rows)?;
    in_span(f, target, &m)
}
