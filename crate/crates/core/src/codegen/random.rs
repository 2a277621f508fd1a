//! Random linear code for two colors whose source and terminal labels both
//! differ, with the leaf checks that certify a draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::code::{Builder, CodeAssignment, Input};
use crate::decompose::Color;
use crate::ff::{Elem, Field, Matrix};
use crate::netgraph::{disjoint_paths, Disjointness, Network, NodeId};
use crate::verify::check_sum_decodable;

use super::three::{finish_terminals, r_phase, Colors};
use super::CodegenError;

/// Result of a single random draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomTrial {
    /// Present when the draw passed every check and decodes everywhere.
    pub code: Option<CodeAssignment>,
    /// Why the draw was rejected.
    pub failure: Option<String>,
}

impl RandomTrial {
    pub fn succeeded(&self) -> bool {
        self.code.is_some()
    }
}

fn leaf_vector(b: &Builder, comb: &[(Input, Elem)]) -> Vec<Elem> {
    let f = b.field();
    let mut acc = vec![f.zero(); 3];
    for &(inp, k) in comb {
        f.axpy(&mut acc, k, &b.input_vector(inp));
    }
    acc
}

fn restricted(v: &[Elem], color: &Color) -> [Elem; 2] {
    [v[color.sources[0]], v[color.sources[1]]]
}

fn independent(f: &Field, a: [Elem; 2], b: [Elem; 2]) -> bool {
    let m = Matrix::from_rows(2, &[a, b]).expect("2x2");
    !m.determinant(f).expect("square").is_zero()
}

/// Nonzero-coordinate check at every colored leaf and independence check at
/// the two leaves each terminal gets from a color's private source.
fn check_leaves(
    net: &Network,
    b: &Builder,
    c: &Colors,
    values: &[Option<Vec<(Input, Elem)>>],
) -> Result<Result<(), String>, CodegenError> {
    let f = b.field();
    let vec_of = |v: NodeId| values[v].as_ref().map(|comb| leaf_vector(b, comb));
    for (j, leaves) in c.dec.leaves.iter().enumerate() {
        for &u in leaves {
            let Some(k) = c.coloring.node_color[u] else { continue };
            let color = c.coloring.palette[k];
            let v = vec_of(u).ok_or_else(|| CodegenError::Invariant("leaf without a drawn value".into()))?;
            if restricted(&v, &color).iter().any(|x| x.is_zero()) {
                return Ok(Err(format!("t{} leaf `{}` of color {color} lost a source: {v:?}", j + 1, net.name(u))));
            }
        }
    }
    let palette = &c.coloring.palette;
    for (k, color) in palette.iter().enumerate() {
        let other = palette[1 - k];
        let Some(s) = color.sources.iter().copied().find(|s| !other.sources.contains(s)) else { continue };
        for &t in &color.terminals {
            let paths = disjoint_paths(net, net.sources()[s], net.terminals()[t], 2, Disjointness::Vertex)?;
            let leaves: Vec<NodeId> = paths
                .paths
                .iter()
                .map(|p| c.dec.leaf_on_path(net, p).ok_or_else(|| CodegenError::Invariant("path without a leaf".into())))
                .collect::<Result<_, _>>()?;
            let colored = |u: NodeId| c.coloring.node_color[u] == Some(k);
            let pair = if colored(leaves[0]) && colored(leaves[1]) {
                [leaves[0], leaves[1]]
            } else {
                let single = *leaves.iter().find(|&&u| !colored(u)).expect("one is not colored");
                let partner = *c.dec.leaves[t]
                    .iter()
                    .find(|&&u| colored(u))
                    .ok_or_else(|| CodegenError::Invariant(format!("t{} has no leaf of color {color}", t + 1)))?;
                [single, partner]
            };
            let [a, bb] = pair.map(|u| vec_of(u).map(|v| restricted(&v, color)));
            let (Some(a), Some(bb)) = (a, bb) else {
                return Err(CodegenError::Invariant("leaf without a drawn value".into()));
            };
            if !independent(f, a, bb) {
                return Ok(Err(format!(
                    "t{} leaves `{}` and `{}` of color {color} have determinant 0",
                    t + 1,
                    net.name(pair[0]),
                    net.name(pair[1])
                )));
            }
        }
    }
    Ok(Ok(()))
}

fn draw(net: &Network, field: &Field, c: &Colors, rng: &mut ChaCha8Rng) -> Result<RandomTrial, CodegenError> {
    let mut b = Builder::new(net, *field);
    let targets = vec![None; c.coloring.palette.len()];
    let values = r_phase(&mut b, c, &targets, Some(rng))?;
    if let Err(why) = check_leaves(net, &b, c, &values)? {
        return Ok(RandomTrial { code: None, failure: Some(why) });
    }
    match finish_terminals(&mut b, c, &values) {
        Ok(()) => {}
        Err(CodegenError::Invariant(why)) => return Ok(RandomTrial { code: None, failure: Some(why) }),
        Err(e) => return Err(e),
    }
    let code = b.finish();
    let report = check_sum_decodable(net, &code)?;
    if !report.all_decodable {
        return Ok(RandomTrial { code: None, failure: Some("assembled code does not decode".into()) });
    }
    Ok(RandomTrial { code: Some(code), failure: None })
}

fn attempt_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// One random draw on a network in the two-color branch.
pub fn random_color_trial(net: &Network, field: &Field, seed: u64) -> Result<RandomTrial, CodegenError> {
    let c = Colors::new(net)?;
    draw(net, field, &c, &mut attempt_rng(seed, 0))
}

pub(crate) fn retry(
    net: &Network,
    field: &Field,
    c: &Colors,
    seed: u64,
    retries: usize,
) -> Result<(CodeAssignment, usize), CodegenError> {
    let mut last = String::from("no attempts allowed");
    for attempt in 0..retries.max(1) {
        let trial = draw(net, field, c, &mut attempt_rng(seed, attempt))?;
        match trial.code {
            Some(code) => return Ok((code, attempt + 1)),
            None => last = trial.failure.unwrap_or_default(),
        }
    }
    Err(CodegenError::RetriesExhausted { attempts: retries.max(1), detail: last })
}
