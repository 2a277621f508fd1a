//! End-to-end code assignment: normalize, pick a construction, build,
//! map back and verify.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::CodeAssignment;
use crate::codegen::{assign_3s_3t, assign_greedy_2s, assign_ns_2t, Branch, CodegenError};
use crate::ff::{Elem, Field};
use crate::netgraph::{normalize, Network};
use crate::transform::{lift_code, reduce_degrees, TransformError};
use crate::verify::{check_decodable, check_sum_decodable, VerificationReport, VerifyError};

pub const DEFAULT_RETRIES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Strategy {
    #[default]
    #[serde(rename = "auto")]
    Auto,
    #[serde(rename = "greedy2s")]
    Greedy2s,
    #[serde(rename = "ns2t")]
    Ns2t,
    #[serde(rename = "3s3t")]
    ThreeByThree,
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "greedy2s" => Ok(Strategy::Greedy2s),
            "ns2t" => Ok(Strategy::Ns2t),
            "3s3t" => Ok(Strategy::ThreeByThree),
            other => Err(format!("unknown strategy `{other}` (expected auto, greedy2s, ns2t or 3s3t)")),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Auto => "auto",
            Strategy::Greedy2s => "greedy2s",
            Strategy::Ns2t => "ns2t",
            Strategy::ThreeByThree => "3s3t",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("unsupported regime: {sources} source(s) and {terminals} terminal(s) (open problem)")]
    Unsupported { sources: usize, terminals: usize },
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("generated code fails at terminal(s) {0:?}")]
    NotDecodable(Vec<usize>),
    #[error("weights must be nonzero and one per source")]
    BadWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssignOptions {
    pub strategy: Strategy,
    pub seed: u64,
    pub retries: usize,
}

impl Default for AssignOptions {
    fn default() -> Self {
        AssignOptions { strategy: Strategy::Auto, seed: 0, retries: DEFAULT_RETRIES }
    }
}

/// A verified code over the normalized form of the input network.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub network: Network,
    pub code: CodeAssignment,
    pub strategy: Strategy,
    pub branch: Option<Branch>,
    pub attempts: usize,
    /// Internal nodes replaced by degree-reduction gadgets.
    pub gadgets: usize,
    pub report: VerificationReport,
}

/// Construction `Auto` picks for a source/terminal count.
pub fn resolve(strategy: Strategy, sources: usize, terminals: usize) -> Result<Strategy, PipelineError> {
    match strategy {
        Strategy::Auto => match (sources, terminals) {
            (2, _) => Ok(Strategy::Greedy2s),
            (_, 2) => Ok(Strategy::Ns2t),
            (3, 3) => Ok(Strategy::ThreeByThree),
            _ => Err(PipelineError::Unsupported { sources, terminals }),
        },
        s => Ok(s),
    }
}

pub fn assign(net: &Network, field: &Field, opts: AssignOptions) -> Result<Assignment, PipelineError> {
    let network = normalize(net).network;
    let strategy = resolve(opts.strategy, network.source_count(), network.terminal_count())?;
    let (code, branch, attempts, gadgets) = match strategy {
        Strategy::Greedy2s => (assign_greedy_2s(&network, field)?, None, 0, 0),
        Strategy::Ns2t => (assign_ns_2t(&network, field)?, None, 0, 0),
        Strategy::ThreeByThree => {
            let red = reduce_degrees(&network)?;
            let out = assign_3s_3t(&red.reduced, field, opts.seed, opts.retries)?;
            (lift_code(&red, &out.code)?, Some(out.branch), out.attempts, red.gadgets.len())
        }
        Strategy::Auto => unreachable!("resolved above"),
    };
    let report = check_sum_decodable(&network, &code)?;
    if !report.all_decodable {
        let bad = report.terminals.iter().filter(|t| !t.decodable).map(|t| t.index).collect();
        return Err(PipelineError::NotDecodable(bad));
    }
    Ok(Assignment { network, code, strategy, branch, attempts, gadgets, report })
}

/// Turns a code delivering the plain sum into one delivering
/// `sum weights[i] * X_i`, and verifies it.
pub fn reweight(
    net: &Network,
    code: &CodeAssignment,
    field: &Field,
    weights: &[Elem],
) -> Result<(CodeAssignment, VerificationReport), PipelineError> {
    if weights.len() != net.source_count() || weights.iter().any(|w| w.is_zero()) {
        return Err(PipelineError::BadWeights);
    }
    let scaled = code.scale_sources(field, weights);
    let report = check_decodable(net, &scaled, weights)?;
    if !report.all_decodable {
        let bad = report.terminals.iter().filter(|t| !t.decodable).map(|t| t.index).collect();
        return Err(PipelineError::NotDecodable(bad));
    }
    Ok((scaled, report))
}
