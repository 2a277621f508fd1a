use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use sumcast::code::CodeAssignment;
use sumcast::codegen::{
    assign_3s_3t, assign_greedy_2s, assign_ns_2t, classify_3s3t, extract_one_path_subgraph,
};
use sumcast::decompose::report;
use sumcast::exec::Exec;
use sumcast::ff::{Field, FieldSpec};
use sumcast::instances::{counterexample_3s3t, counterexample_3s3t_plus, random_dag, structured_3s3t, DagShape, Family};
use sumcast::netgraph::{max_flow, normalize, vertex_max_flow, Network};
use sumcast::pipeline::{assign, AssignOptions, Strategy, DEFAULT_RETRIES};
use sumcast::transform::{lift_code, reduce_degrees};
use sumcast::verify::{
    check_sum_decodable, exhaustive_code_search, sum_functionality_oracle, vector_2s2t_oracle, Enumeration,
    VerifyError, SEARCH_LIMIT,
};

#[derive(Parser, Debug)]
#[command(name = "sumcast", version, about = "Build and check network codes that multicast the sum of the sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Network JSON to read.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Where to write the result; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Field, `prime:<p>` or `gf2m:<m>`.
    #[arg(long, global = true, default_value = "prime:3")]
    field: FieldSpec,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "auto")]
    strategy: Strategy,
    /// Random draws allowed before the randomized construction gives up.
    #[arg(long, global = true, default_value_t = DEFAULT_RETRIES)]
    retries: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the max-flow table and which constructions apply.
    Check,
    /// Reduce internal degrees to at most 3; writes the reduced network and the node/edge mapping.
    Transform,
    /// Labels, edge classes, leaf sets and colors of a three-source, three-terminal network.
    Decompose,
    /// Generate a code and verify it before writing it.
    Assign,
    /// Check a code against a network.
    Verify {
        /// Code JSON; edge ids refer to the normalized network.
        #[arg(long)]
        code: PathBuf,
    },
    /// Run a built-in impossibility example.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        /// Enumeration used by `vector-2s2t`.
        #[arg(long, value_enum, default_value = "factorized")]
        enumeration: EnumerationArg,
    },
    /// Run the randomized instance suites.
    Selftest {
        /// Instances per suite.
        #[arg(long, default_value_t = 50)]
        cases: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Demo {
    #[value(name = "counterexample-3s3t")]
    Counterexample3s3t,
    #[value(name = "vector-2s2t")]
    Vector2s2t,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EnumerationArg {
    Full,
    Factorized,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    NotDecodable(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Input(_) => "input",
            CliError::Failed(_) => "failed",
            CliError::NotDecodable(_) => "not_decodable",
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NotDecodable(_) => 3,
            _ => 1,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Accepts a bare network document or any object with a `network` member,
/// such as the output of `transform`.
fn load_network(path: Option<&Path>) -> Result<Network, CliError> {
    let path = path.ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(input)?;
    let doc = match value.get("network") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let raw = serde_json::from_value(doc).map_err(input)?;
    sumcast::netgraph::NetworkJson::into_network(raw).map_err(input)
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn flow_table(net: &Network) -> Value {
    let rows: Vec<Value> = net
        .sources()
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| {
            net.terminals().iter().enumerate().map(move |(j, &t)| {
                json!({ "source": i + 1, "terminal": j + 1, "edge_flow": max_flow(net, s, t), "vertex_flow": vertex_max_flow(net, s, t) })
            })
        })
        .collect();
    Value::Array(rows)
}

fn check(cli: &Cli) -> Result<(), CliError> {
    let net = normalize(&load_network(cli.input.as_deref())?).network;
    let (ns, nt) = (net.source_count(), net.terminal_count());
    let min_flow = net
        .sources()
        .iter()
        .flat_map(|&s| net.terminals().iter().map(move |&t| (s, t)))
        .map(|(s, t)| max_flow(&net, s, t))
        .min()
        .unwrap_or(0);
    let hypotheses = json!({
        "two_sources": { "applies": ns == 2, "holds": ns == 2 && min_flow >= 1, "needs": "2 sources, every pair connected" },
        "two_terminals": { "applies": nt == 2, "holds": nt == 2 && min_flow >= 1, "needs": "2 terminals, every pair connected" },
        "three_by_three": { "applies": ns == 3 && nt == 3, "holds": ns == 3 && nt == 3 && min_flow >= 2, "needs": "3 sources, 3 terminals, 2 edge-disjoint paths per pair" },
    });
    emit(
        cli.output.as_deref(),
        &json!({ "sources": ns, "terminals": nt, "min_edge_flow": min_flow, "flows": flow_table(&net), "hypotheses": hypotheses }),
    )
}

fn transform(cli: &Cli) -> Result<(), CliError> {
    let net = normalize(&load_network(cli.input.as_deref())?).network;
    let red = reduce_degrees(&net).map_err(failed)?;
    emit(cli.output.as_deref(), &json!({ "network": red.reduced.to_json(), "mapping": red.mapping_json() }))
}

fn decompose(cli: &Cli) -> Result<(), CliError> {
    let net = normalize(&load_network(cli.input.as_deref())?).network;
    emit(cli.output.as_deref(), &report(&net).map_err(failed)?)
}

fn assign_cmd(cli: &Cli) -> Result<(), CliError> {
    let net = load_network(cli.input.as_deref())?;
    let f = cli.field.build().map_err(input)?;
    let opts = AssignOptions { strategy: cli.strategy, seed: cli.seed, retries: cli.retries };
    let a = assign(&net, &f, opts).map_err(failed)?;
    // Round-trip through the emitted form and verify what is actually written.
    let doc = a.code.to_json();
    let text = serde_json::to_string(&doc).expect("code serializes");
    let reread = CodeAssignment::from_json(&text, a.network.edge_count()).map_err(failed)?;
    let rep = check_sum_decodable(&a.network, &reread).map_err(failed)?;
    if !rep.all_decodable {
        return Err(CliError::NotDecodable("generated code failed re-verification".into()));
    }
    eprintln!(
        "{}",
        json!({ "strategy": a.strategy, "branch": a.branch.map(|b| b.to_string()), "attempts": a.attempts, "gadgets": a.gadgets, "all_decodable": true })
    );
    emit(cli.output.as_deref(), &doc)
}

fn verify_cmd(cli: &Cli, code: &Path) -> Result<(), CliError> {
    let net = normalize(&load_network(cli.input.as_deref())?).network;
    let code = CodeAssignment::from_json(&read(code)?, net.edge_count()).map_err(input)?;
    let rep = check_sum_decodable(&net, &code).map_err(|e| match e {
        VerifyError::Code(_) => input(e),
        other => failed(other),
    })?;
    emit(cli.output.as_deref(), &rep)?;
    if rep.all_decodable {
        Ok(())
    } else {
        let bad: Vec<usize> = rep.terminals.iter().filter(|t| !t.decodable).map(|t| t.index).collect();
        Err(CliError::NotDecodable(format!("terminal(s) {bad:?} cannot recover the sum")))
    }
}

fn search_summary(net: &Network, f: &Field) -> Value {
    match exhaustive_code_search(net, f, SEARCH_LIMIT, Exec::Par) {
        Ok(out) => serde_json::to_value(out).expect("outcome serializes"),
        Err(e) => json!({ "skipped": e.to_string() }),
    }
}

fn demo(cli: &Cli, which: Demo, enumeration: EnumerationArg) -> Result<(), CliError> {
    let f = cli.field.build().map_err(input)?;
    let value = match which {
        Demo::Counterexample3s3t => {
            let net = counterexample_3s3t();
            let flows = flow_table(&net);
            let two_paths = net
                .sources()
                .iter()
                .all(|&s| net.terminals().iter().all(|&t| max_flow(&net, s, t) >= 2));
            json!({
                "demo": "counterexample-3s3t",
                "field": f.spec(),
                "network": net.to_json(),
                "flows": flows,
                "two_paths_per_pair": two_paths,
                "pair_sums_determine_total": sum_functionality_oracle(&f),
                "search": search_summary(&net, &f),
                "search_with_extra_edge": search_summary(&counterexample_3s3t_plus(), &f),
            })
        }
        Demo::Vector2s2t => {
            let mode = match enumeration {
                EnumerationArg::Full => Enumeration::Full,
                EnumerationArg::Factorized => Enumeration::Factorized,
            };
            let strict = vector_2s2t_oracle(&f, false, mode, Exec::Par);
            let relaxed = vector_2s2t_oracle(&f, true, mode, Exec::Par);
            json!({
                "demo": "vector-2s2t",
                "field": f.spec(),
                "verdict": if strict.feasible { "feasible" } else { "infeasible" },
                "enumerated": strict.enumerated.to_string(),
                "strict": strict,
                "one_terminal_only": relaxed,
            })
        }
    };
    emit(cli.output.as_deref(), &value)
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    cases: u64,
    passed: u64,
    failures: Vec<String>,
}

fn run_suite(name: &'static str, seeds: &[u64], case: impl Fn(u64) -> Result<(), String> + Sync + Send) -> Suite {
    let results = Exec::Par.map(seeds, |&s| case(s).map_err(|e| format!("seed {s}: {e}")));
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    Suite { name, cases: seeds.len() as u64, passed: seeds.len() as u64 - failures.len() as u64, failures }
}

fn verified(net: &Network, code: &CodeAssignment) -> Result<(), String> {
    let rep = check_sum_decodable(net, code).map_err(|e| e.to_string())?;
    if rep.all_decodable {
        Ok(())
    } else {
        Err("not decodable".into())
    }
}

fn selftest(cli: &Cli, cases: u64) -> Result<(), CliError> {
    let f = cli.field.build().map_err(input)?;
    let gf256 = FieldSpec::Binary(8).build().expect("gf2m:8");
    let gf3 = Field::gf3();
    let base = cli.seed;
    let seeds: Vec<u64> = (0..cases).map(|k| base.wrapping_add(k)).collect();
    let suites = vec![
        run_suite("two_sources", &seeds, |s| {
            let net = normalize(&random_dag(DagShape::new(2, 2 + (s % 3) as usize), s)).network;
            verified(&net, &assign_greedy_2s(&net, &f).map_err(|e| e.to_string())?)
        }),
        run_suite("two_terminals", &seeds, |s| {
            let net = normalize(&random_dag(DagShape::new(3 + (s % 3) as usize, 2), s)).network;
            extract_one_path_subgraph(&net).map_err(|e| e.to_string())?;
            verified(&net, &assign_ns_2t(&net, &f).map_err(|e| e.to_string())?)
        }),
        run_suite("three_by_three_families", &seeds, |s| {
            let family = Family::ALL[(s % Family::ALL.len() as u64) as usize];
            let net = structured_3s3t(family, s);
            let branch = classify_3s3t(&net).map_err(|e| e.to_string())?;
            let field = match (branch.is_random(), f.characteristic()) {
                (true, _) => &gf256,
                (false, 2) => &gf3,
                (false, _) => &f,
            };
            let out = assign_3s_3t(&net, field, s, cli.retries).map_err(|e| format!("{family:?}: {e}"))?;
            verified(&net, &out.code)
        }),
        run_suite("degree_reduction", &seeds, |s| {
            let shape = DagShape { routes: 2, wide_edges: 0.3, extra_edges: 10, ..DagShape::new(3, 3) };
            let net = normalize(&random_dag(shape, s)).network;
            let red = reduce_degrees(&net).map_err(|e| e.to_string())?;
            let out = assign_3s_3t(&red.reduced, &gf256, s, cli.retries).map_err(|e| e.to_string())?;
            verified(&net, &lift_code(&red, &out.code).map_err(|e| e.to_string())?)
        }),
    ];
    let ok = suites.iter().all(|s| s.failures.is_empty());
    emit(cli.output.as_deref(), &json!({ "field": f.spec(), "seed": base, "suites": suites }))?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed("selftest suites reported failures".into()))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Check => check(cli),
        Command::Transform => transform(cli),
        Command::Decompose => decompose(cli),
        Command::Assign => assign_cmd(cli),
        Command::Verify { code } => verify_cmd(cli, code),
        Command::Demo { which, enumeration } => demo(cli, *which, *enumeration),
        Command::Selftest { cases } => selftest(cli, *cases),
    }
}

fn report_error(err: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": err.kind(), "message": err.to_string() }));
    ExitCode::from(err.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => return report_error(&CliError::Usage(e.to_string().trim().to_string())),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e),
    }
}
