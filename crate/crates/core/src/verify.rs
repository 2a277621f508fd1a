//! Global coding vectors, sum-decodability certificates, and brute-force
//! feasibility oracles.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::code::{CodeAssignment, CodeError, Input};
use crate::exec::Exec;
use crate::ff::{in_span, Elem, FfError, Field, FieldSpec, Matrix, Span};
use crate::netgraph::{EdgeId, Network};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error("search space of {space} canonical codes exceeds the limit of {limit}")]
    TooLarge { space: u128, limit: u128 },
    #[error("exhaustive search expects a normalized network")]
    NotNormalized,
}

/// Per-edge global coding vectors by one topological sweep.
pub fn propagate(net: &Network, code: &CodeAssignment) -> Result<Vec<Vec<Elem>>, VerifyError> {
    let f = code.field.build()?;
    code.check_inputs(net)?;
    let n = net.source_count();
    let mut beta = vec![vec![Elem::ZERO; n]; net.edge_count()];
    for e in net.edges_in_topo_order() {
        let mut v = vec![Elem::ZERO; n];
        for &(inp, c) in code.get(e) {
            match inp {
                Input::Edge(x) => {
                    let src = beta[x].clone();
                    f.axpy(&mut v, c, &src);
                }
                Input::Source(i) => v[i - 1] = f.add(v[i - 1], c),
            }
        }
        beta[e] = v;
    }
    Ok(beta)
}

/// Numeric evaluation: the symbol carried by every edge when source `i`
/// observes `x[i]`.
pub fn evaluate(net: &Network, code: &CodeAssignment, f: &Field, x: &[Elem]) -> Vec<Elem> {
    let mut y = vec![Elem::ZERO; net.edge_count()];
    for e in net.edges_in_topo_order() {
        let mut acc = Elem::ZERO;
        for &(inp, c) in code.get(e) {
            let value = match inp {
                Input::Edge(x_e) => y[x_e],
                Input::Source(i) => x[i - 1],
            };
            acc = f.mul_add(acc, c, value);
        }
        y[e] = acc;
    }
    y
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeTerm {
    pub edge: EdgeId,
    pub coeff: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerminalReport {
    pub terminal: String,
    pub index: usize,
    pub decodable: bool,
    /// Incoming global vectors, one per in-edge.
    pub received: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decode: Option<Vec<DecodeTerm>>,
    pub rank: usize,
    /// Rank after appending the target; exceeds `rank` exactly when decoding fails.
    pub augmented_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub field: FieldSpec,
    pub target: Vec<u32>,
    pub terminals: Vec<TerminalReport>,
    pub all_decodable: bool,
}

/// Checks that every terminal can recover `sum X_i`.
pub fn check_sum_decodable(net: &Network, code: &CodeAssignment) -> Result<VerificationReport, VerifyError> {
    let f = code.field.build()?;
    check_decodable(net, code, &f.ones(net.source_count()))
}

/// Checks that every terminal can recover `sum target_i X_i`.
pub fn check_decodable(net: &Network, code: &CodeAssignment, target: &[Elem]) -> Result<VerificationReport, VerifyError> {
    let f = code.field.build()?;
    let beta = propagate(net, code)?;
    let n = net.source_count();
    let mut terminals = Vec::with_capacity(net.terminal_count());
    for (j, &t) in net.terminals().iter().enumerate() {
        let ins = net.in_edges(t);
        let mut rows = Matrix::with_cols(n);
        for &e in ins {
            rows.push_row(&beta[e])?;
        }
        let rank = rows.rank(&f);
        let received = ins.iter().map(|&e| beta[e].iter().map(|x| x.value()).collect()).collect();
        let report = match in_span(&f, target, &rows)? {
            Span::Member(c) => TerminalReport {
                terminal: net.name(t).to_string(),
                index: j + 1,
                decodable: true,
                received,
                decode: Some(
                    ins.iter()
                        .zip(&c)
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(&edge, c)| DecodeTerm { edge, coeff: c.value() })
                        .collect(),
                ),
                rank,
                augmented_rank: rank,
            },
            Span::Outside { augmented_rank, .. } => TerminalReport {
                terminal: net.name(t).to_string(),
                index: j + 1,
                decodable: false,
                received,
                decode: None,
                rank,
                augmented_rank,
            },
        };
        terminals.push(report);
    }
    let all_decodable = terminals.iter().all(|t| t.decodable);
    Ok(VerificationReport { field: f.spec(), target: target.iter().map(|x| x.value()).collect(), terminals, all_decodable })
}

/// Outcome of a functional-dependence test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Functionality {
    Functional,
    /// Two source tuples with equal observations but different targets.
    NotFunctional { first: Vec<u32>, second: Vec<u32> },
}

/// Source tuples of length `n` over `f` in lexicographic order.
fn tuples(f: &Field, n: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let q = f.order() as u64;
    let total = q.pow(n as u32);
    (0..total).map(move |mut k| {
        let mut x = vec![Elem::ZERO; n];
        for slot in x.iter_mut().rev() {
            *slot = f.elem(k % q).expect("digit below order");
            k /= q;
        }
        x
    })
}

fn dot(f: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter().zip(b).fold(Elem::ZERO, |acc, (&x, &y)| f.mul_add(acc, x, y))
}

/// Decides by enumeration whether the linear observations `forms` determine
/// `target . x` for every source tuple `x`.
pub fn functionality_oracle(f: &Field, forms: &[Vec<Elem>], target: &[Elem]) -> Functionality {
    let n = target.len();
    let mut seen: HashMap<Vec<Elem>, (Vec<Elem>, Elem)> = HashMap::new();
    for x in tuples(f, n) {
        let key: Vec<Elem> = forms.iter().map(|row| dot(f, row, &x)).collect();
        let value = dot(f, target, &x);
        match seen.get(&key) {
            Some((prev, v)) if *v != value => {
                let show = |t: &[Elem]| t.iter().map(|e| e.value()).collect();
                return Functionality::NotFunctional { first: show(prev), second: show(&x) };
            }
            Some(_) => {}
            None => {
                seen.insert(key, (x, value));
            }
        }
    }
    Functionality::Functional
}

/// Whether `(X1+X2, X2+X3)` determines `X1+X2+X3` over `f`.
pub fn sum_functionality_oracle(f: &Field) -> Functionality {
    let one = f.one();
    let zero = f.zero();
    let forms = vec![vec![one, one, zero], vec![zero, one, one]];
    functionality_oracle(f, &forms, &f.ones(3))
}

/// Default cap on the number of canonical codes an exhaustive search may visit.
pub const SEARCH_LIMIT: u128 = 100_000_000;

/// Per-edge function table: `table[arg]` where `arg` packs the tail's
/// inputs base `q`, first input most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeTable {
    pub edge: EdgeId,
    pub table: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub feasible: bool,
    /// Number of canonical codes in the search space.
    pub space: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<EdgeTable>>,
}

/// Restricted growth strings of length `len` over at most `q` symbols: one
/// representative per output relabeling class of function tables.
fn canonical_tables(len: usize, q: usize) -> Vec<Vec<u8>> {
    fn grow(prefix: &mut Vec<u8>, max: u8, len: usize, q: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        let hi = if prefix.is_empty() { 0 } else { (max as usize + 1).min(q - 1) };
        for v in 0..=hi as u8 {
            prefix.push(v);
            grow(prefix, max.max(v), len, q, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(len), 0, len, q, &mut out);
    out
}

/// Number of restricted growth strings: sum of Stirling numbers S(len, k), k <= q.
fn canonical_count(len: usize, q: usize) -> u128 {
    // row[k] = S(i, k), saturating.
    let mut row = vec![0u128; q + 1];
    row[0] = 1;
    for _ in 0..len {
        let mut next = vec![0u128; q + 1];
        for k in 1..=q {
            next[k] = (k as u128).saturating_mul(row[k]).saturating_add(row[k - 1]);
        }
        row = next;
    }
    row.iter().skip(1).fold(0u128, |a, &b| a.saturating_add(b))
}

struct SearchPlan {
    q: usize,
    order: Vec<EdgeId>,
    /// Per position: inputs as earlier positions (`Ok`) or source indices (`Err`).
    inputs: Vec<Vec<Result<usize, usize>>>,
    tables: Vec<std::sync::Arc<Vec<Vec<u8>>>>,
    /// Terminals fully determined after each position.
    checks: Vec<Vec<Vec<usize>>>,
    tuples: Vec<Vec<u8>>,
    sums: Vec<u8>,
}

impl SearchPlan {
    fn terminal_ok(&self, positions: &[usize], values: &[Vec<u8>]) -> bool {
        let q = self.q;
        let mut map: HashMap<usize, u8> = HashMap::new();
        for (k, &s) in self.sums.iter().enumerate() {
            let key = positions.iter().fold(0usize, |acc, &p| acc * q + values[p][k] as usize);
            if *map.entry(key).or_insert(s) != s {
                return false;
            }
        }
        true
    }

    fn apply(&self, pos: usize, table: &[u8], values: &mut [Vec<u8>]) {
        let q = self.q;
        for k in 0..self.sums.len() {
            let arg = self.inputs[pos].iter().fold(0usize, |acc, inp| {
                let v = match *inp {
                    Ok(p) => values[p][k],
                    Err(i) => self.tuples[k][i],
                };
                acc * q + v as usize
            });
            values[pos][k] = table[arg];
        }
    }

    fn dfs(&self, pos: usize, values: &mut Vec<Vec<u8>>, chosen: &mut Vec<usize>) -> bool {
        if pos == self.order.len() {
            return true;
        }
        for (ti, table) in self.tables[pos].iter().enumerate() {
            self.apply(pos, table, values);
            if self.checks[pos].iter().all(|t| self.terminal_ok(t, values)) {
                chosen.push(ti);
                if self.dfs(pos + 1, values, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
}

/// Searches all codes, linear or not, for one letting every terminal compute
/// `sum X_i`. Tables are canonicalized up to output relabeling, which does
/// not affect feasibility.
pub fn exhaustive_code_search(net: &Network, f: &Field, limit: u128, exec: Exec) -> Result<SearchOutcome, VerifyError> {
    if !net.is_normalized() {
        return Err(VerifyError::NotNormalized);
    }
    let q = f.order() as usize;
    let n = net.source_count();
    let order = net.edges_in_topo_order();
    let pos_of: HashMap<EdgeId, usize> = order.iter().enumerate().map(|(p, &e)| (e, p)).collect();
    let mut inputs = Vec::with_capacity(order.len());
    let mut space: u128 = 1;
    let mut lens = Vec::with_capacity(order.len());
    for &e in &order {
        let tail = net.edge(e).tail;
        let mut list: Vec<Result<usize, usize>> = Vec::new();
        if let Some(i) = net.source_pos(tail) {
            list.push(Err(i));
        }
        list.extend(net.in_edges(tail).iter().map(|x| Ok(pos_of[x])));
        let len = q.checked_pow(list.len() as u32).unwrap_or(usize::MAX);
        space = space.saturating_mul(canonical_count(len, q));
        if space > limit {
            return Err(VerifyError::TooLarge { space, limit });
        }
        lens.push(len);
        inputs.push(list);
    }
    let mut cache: HashMap<usize, std::sync::Arc<Vec<Vec<u8>>>> = HashMap::new();
    let tables = lens
        .iter()
        .map(|&len| cache.entry(len).or_insert_with(|| std::sync::Arc::new(canonical_tables(len, q))).clone())
        .collect();

    let tuples: Vec<Vec<u8>> =
        tuples(f, n).map(|x| x.iter().map(|e| e.value() as u8).collect()).collect::<Vec<_>>();
    let sums = tuples
        .iter()
        .map(|x| x.iter().fold(f.zero(), |acc, &v| f.add(acc, f.elem(v as u64).expect("canonical"))).value() as u8)
        .collect::<Vec<_>>();

    let mut checks = vec![Vec::new(); order.len()];
    for &t in net.terminals() {
        let positions: Vec<usize> = net.in_edges(t).iter().map(|e| pos_of[e]).collect();
        match positions.iter().max() {
            Some(&last) => checks[last].push(positions),
            None => {
                // A terminal with no inputs sees a constant.
                if n > 0 && q > 1 {
                    return Ok(SearchOutcome { feasible: false, space, witness: None });
                }
            }
        }
    }
    let plan = SearchPlan { q, order, inputs, tables, checks, tuples, sums };
    if plan.order.is_empty() {
        return Ok(SearchOutcome { feasible: true, space, witness: Some(Vec::new()) });
    }

    // Partition on the first one or two positions; the first feasible
    // prefix in lexicographic order wins, independent of scheduling.
    let depth = plan.order.len().min(2);
    let mut prefixes: Vec<Vec<usize>> = vec![Vec::new()];
    for pos in 0..depth {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| (0..plan.tables[pos].len()).map(move |t| [p.clone(), vec![t]].concat()))
            .collect();
    }
    let found = exec.find_map_first(&prefixes, |prefix| {
        let mut values = vec![vec![0u8; plan.sums.len()]; plan.order.len()];
        for (pos, &ti) in prefix.iter().enumerate() {
            plan.apply(pos, &plan.tables[pos][ti], &mut values);
            if !plan.checks[pos].iter().all(|t| plan.terminal_ok(t, &values)) {
                return None;
            }
        }
        let mut chosen = prefix.clone();
        plan.dfs(prefix.len(), &mut values, &mut chosen).then_some(chosen)
    });
    let witness = found.map(|chosen| {
        chosen
            .iter()
            .enumerate()
            .map(|(pos, &ti)| EdgeTable {
                edge: plan.order[pos],
                table: plan.tables[pos][ti].iter().map(|&v| v as u32).collect(),
            })
            .collect::<Vec<_>>()
    });
    let mut witness = witness;
    if let Some(w) = witness.as_mut() {
        w.sort_by_key(|t| t.edge);
    }
    Ok(SearchOutcome { feasible: witness.is_some(), space, witness })
}

/// Parameters of the two-source vector-sum transfer model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VectorAssignment {
    pub alpha: [u32; 2],
    pub beta: [u32; 2],
    pub alpha_prime: [u32; 2],
    pub beta_prime: [u32; 2],
    pub a1: [[u32; 2]; 2],
    pub b1: [[u32; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VectorOutcome {
    pub field: FieldSpec,
    pub relaxed: bool,
    pub feasible: bool,
    /// Parametrized assignments covered (`q^16`).
    pub enumerated: u128,
    /// Assignments letting the required terminals decode.
    pub feasible_count: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<VectorAssignment>,
}

/// How the 16-parameter space is covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Visit every tuple explicitly; each terminal's rank test is evaluated
    /// once per half and looked up.
    Full,
    /// For each `(A1, B1)`, count good unprimed and primed halves separately
    /// and multiply; exact because each terminal depends on one half only.
    Factorized,
}

fn elems2(f: &Field, k: u64) -> [Elem; 4] {
    let q = f.order() as u64;
    let mut out = [Elem::ZERO; 4];
    let mut k = k;
    for slot in out.iter_mut().rev() {
        *slot = f.elem(k % q).expect("digit");
        k /= q;
    }
    out
}

/// Whether the rows `[1,0,1,0]` and `[0,1,0,1]` lie in the row space of
/// `z * blockdiag(a1, b1)`.
fn terminal_decodes(f: &Field, z: [[Elem; 4]; 2], a1: [Elem; 4], b1: [Elem; 4]) -> bool {
    let mut m = Matrix::zeros(2, 4);
    for r in 0..2 {
        for c in 0..2 {
            // columns 0..2 act on (a, a'), columns 2..4 on (b, b')
            let left = f.add(f.mul(z[r][0], a1[c]), f.mul(z[r][1], a1[2 + c]));
            let right = f.add(f.mul(z[r][2], b1[c]), f.mul(z[r][3], b1[2 + c]));
            m.set(r, c, left);
            m.set(r, 2 + c, right);
        }
    }
    let rank = m.rank(f);
    let (o, z0) = (f.one(), f.zero());
    let mut aug = m.clone();
    aug.push_row(&[o, z0, o, z0]).expect("width 4");
    aug.push_row(&[z0, o, z0, o]).expect("width 4");
    aug.rank(f) == rank
}

fn z_t1(f: &Field, p: [Elem; 4]) -> [[Elem; 4]; 2] {
    let [a1, a2, b1, b2] = p;
    let z = f.zero();
    [[a1, a2, b1, z], [z, a2, b1, b2]]
}

fn z_t2(f: &Field, p: [Elem; 4]) -> [[Elem; 4]; 2] {
    let [a1, a2, b1, b2] = p;
    let z = f.zero();
    [[a1, z, b1, z], [z, a2, z, b2]]
}

/// Enumerates the linear codes of the two-source, two-terminal vector-sum
/// network in its transfer-matrix form. With `relaxed`, only the second
/// terminal must decode.
pub fn vector_2s2t_oracle(f: &Field, relaxed: bool, mode: Enumeration, exec: Exec) -> VectorOutcome {
    let q = f.order() as u64;
    let q4 = q.pow(4);
    let show = |x: [Elem; 4]| [x[0].value(), x[1].value(), x[2].value(), x[3].value()];
    let witness_of = |ab: u64, p1: u64, p2: u64| {
        let (a, b) = (elems2(f, ab / q4), elems2(f, ab % q4));
        let (u, v) = (show(elems2(f, p1)), show(elems2(f, p2)));
        let (a, b) = (show(a), show(b));
        VectorAssignment {
            alpha: [u[0], u[1]],
            beta: [u[2], u[3]],
            alpha_prime: [v[0], v[1]],
            beta_prime: [v[2], v[3]],
            a1: [[a[0], a[1]], [a[2], a[3]]],
            b1: [[b[0], b[1]], [b[2], b[3]]],
        }
    };
    let ok1 = |ab: u64, p: u64| relaxed || terminal_decodes(f, z_t1(f, elems2(f, p)), elems2(f, ab / q4), elems2(f, ab % q4));
    let ok2 = |ab: u64, p: u64| terminal_decodes(f, z_t2(f, elems2(f, p)), elems2(f, ab / q4), elems2(f, ab % q4));

    let per_matrix = |ab: u64| -> u128 {
        match mode {
            Enumeration::Full => {
                let good1: Vec<bool> = (0..q4).map(|p| ok1(ab, p)).collect();
                let good2: Vec<bool> = (0..q4).map(|p| ok2(ab, p)).collect();
                let mut c = 0u128;
                for &g1 in &good1 {
                    for &g2 in &good2 {
                        c += u128::from(g1 && g2);
                    }
                }
                c
            }
            Enumeration::Factorized => {
                let c1 = (0..q4).filter(|&p| ok1(ab, p)).count() as u128;
                if c1 == 0 {
                    return 0;
                }
                c1 * (0..q4).filter(|&p| ok2(ab, p)).count() as u128
            }
        }
    };
    let matrices: Vec<u64> = (0..q4 * q4).collect();
    let feasible_count = exec.sum_range(0..q4 * q4, per_matrix);
    let witness = if feasible_count > 0 {
        exec.find_map_first(&matrices, |&ab| {
            let p1 = (0..q4).find(|&p| ok1(ab, p))?;
            let p2 = (0..q4).find(|&p| ok2(ab, p))?;
            Some(witness_of(ab, p1, p2))
        })
    } else {
        None
    };
    VectorOutcome {
        field: f.spec(),
        relaxed,
        feasible: feasible_count > 0,
        enumerated: (q as u128).pow(16),
        feasible_count,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::NetworkBuilder;

    #[test]
    fn rgs_counts_match_enumeration() {
        for (len, q) in [(1, 2), (2, 2), (4, 2), (4, 3), (3, 5), (9, 3)] {
            assert_eq!(canonical_tables(len, q).len() as u128, canonical_count(len, q), "len {len} q {q}");
        }
        assert_eq!(canonical_count(4, 2), 8);
        assert_eq!(canonical_count(2, 2), 2);
    }

    #[test]
    fn functionality_examples() {
        let gf2 = FieldSpec::Prime(2).build().unwrap();
        assert_eq!(
            sum_functionality_oracle(&gf2),
            Functionality::NotFunctional { first: vec![0, 1, 1], second: vec![1, 0, 0] }
        );
        let one = gf2.one();
        assert_eq!(functionality_oracle(&gf2, &[vec![one, one]], &[one, one]), Functionality::Functional);
    }

    #[test]
    fn single_edge_search_is_feasible() {
        let mut b = NetworkBuilder::new();
        let s = b.source(1);
        let t = b.terminal(1);
        b.edge(s, t);
        let net = b.build().unwrap();
        let f = FieldSpec::Prime(2).build().unwrap();
        let out = exhaustive_code_search(&net, &f, SEARCH_LIMIT, Exec::Seq).unwrap();
        assert!(out.feasible);
        assert_eq!(out.witness.unwrap()[0].table, vec![0, 1]);
    }

    #[test]
    fn relaxed_identity_witness() {
        let f = FieldSpec::Prime(2).build().unwrap();
        let one = f.one();
        let z = f.zero();
        let id = [one, z, z, one];
        assert!(terminal_decodes(&f, z_t2(&f, [one; 4]), id, id));
        assert!(!terminal_decodes(&f, z_t1(&f, [one; 4]), id, id));
    }
}
