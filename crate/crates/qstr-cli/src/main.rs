//! Command-line front end for the qstr reasoning engine.
//!
//! Subcommands map one-to-one onto library operations: parse and close
//! networks, search for scenarios, score and maximize robustness, rectify
//! probabilities against background knowledge, and render exports. Identical
//! invocations produce byte-identical stdout; diagnostics and warnings go to
//! stderr. Exit codes: 0 success/consistent, 1 inconsistent/UNSAT or a
//! probability contradiction, 2 usage, parse, or validation errors.

use std::env;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qstr::calculi::{load_calculus, validate_calculus, ViolationKind};
use qstr::export::{to_asp_facts, to_neurasp_atoms};
use qstr::generator::{random_qcn, RandomModel};
use qstr::network::{
    parse_network_with, CalculusResolver, LabelAnnotation, NetworkDocument, ProbAnnotation,
};
use qstr::probabilistic::{max_robust_scenario, rectify, ProbabilisticQcn, RobustnessReport};
use qstr::solver::{a_closure, enumerate_scenarios, enumerate_scenarios_parallel, solve};
use qstr::{Calculus, Error as QstrError, Qcn};

#[derive(Parser)]
#[command(
    name = "qstr",
    version,
    about = "Qualitative spatio-temporal constraint reasoning",
    propagate_version = true
)]
struct Cli {
    /// Emit JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for scenario enumeration; output order is unchanged.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Calculus name or .cal file, overriding what network files declare.
    #[arg(long, global = true)]
    calculus: Option<String>,

    /// Write output to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Extra progress detail on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run algebraic closure and report CONSISTENT or INCONSISTENT.
    Check { file: PathBuf },

    /// Print one scenario as a network file, or UNSAT.
    Solve { file: PathBuf },

    /// Enumerate scenarios, one per line.
    Scenarios {
        file: PathBuf,
        /// Stop after this many scenarios.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: Option<u64>,
    },

    /// Edge probabilities derived from scenario frequencies.
    Probs { file: PathBuf },

    /// Score an atomic refinement against the network's probabilities.
    Robustness {
        file: PathBuf,
        /// Network file holding the atomic refinement to score.
        #[arg(long)]
        refinement: PathBuf,
    },

    /// Find the scenario with maximum robustness.
    Maxrobust {
        file: PathBuf,
        /// Hard constraints intersected into the network before the search.
        #[arg(long)]
        background: Option<PathBuf>,
    },

    /// Reconcile probabilities with hard background knowledge.
    Rectify {
        file: PathBuf,
        /// Network file holding the background constraints.
        #[arg(long)]
        background: PathBuf,
    },

    /// Render a network for external tools.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
    },

    /// Check a calculus definition against the algebra laws.
    ValidateCalculus {
        /// Path to a .cal file, or a calculus name (builtin or on
        /// QSTR_CALCULUS_PATH).
        calculus: String,
    },

    /// Generate a seeded random network.
    Gen {
        /// Model parameters in the form A(n,d,l): n variables, constraint
        /// density d, at most l base relations per constraint.
        #[arg(long, value_parser = parse_model_arg)]
        model: Model,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Network name in the emitted file.
        #[arg(long, default_value = "generated")]
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Neurasp,
    Asp,
    Dot,
}

impl ExportFormat {
    fn tag(self) -> &'static str {
        match self {
            ExportFormat::Neurasp => "neurasp",
            ExportFormat::Asp => "asp",
            ExportFormat::Dot => "dot",
        }
    }
}

#[derive(Clone, Debug)]
struct Model {
    variables: usize,
    density: f64,
    label_size: usize,
}

fn parse_model_arg(s: &str) -> std::result::Result<Model, String> {
    let inner = s
        .strip_prefix("A(")
        .or_else(|| s.strip_prefix("a("))
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| format!("expected A(n,d,l), got `{s}`"))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three parameters in A(n,d,l), got {}", parts.len()));
    }
    let variables: usize = parts[0]
        .parse()
        .map_err(|_| format!("variable count `{}` is not a positive integer", parts[0]))?;
    let density: f64 = parts[1]
        .parse()
        .map_err(|_| format!("density `{}` is not a number", parts[1]))?;
    let label_size: usize = parts[2]
        .parse()
        .map_err(|_| format!("label size `{}` is not a positive integer", parts[2]))?;
    Ok(Model {
        variables,
        density,
        label_size,
    })
}

enum Outcome {
    Success,
    Unsat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
        {
            eprintln!("warning: could not configure {jobs} worker threads: {e}");
        }
    }
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Unsat) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Parse and IO problems are usage-class (2); a missing scenario or a
/// probability contradiction is a semantic UNSAT (1).
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<QstrError>() {
        Some(QstrError::NoScenario) | Some(QstrError::Contradiction { .. }) => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Check { file } => cmd_check(cli, file),
        Cmd::Solve { file } => cmd_solve(cli, file),
        Cmd::Scenarios { file, limit } => cmd_scenarios(cli, file, limit.map(|l| l as usize)),
        Cmd::Probs { file } => cmd_probs(cli, file),
        Cmd::Robustness { file, refinement } => cmd_robustness(cli, file, refinement),
        Cmd::Maxrobust { file, background } => cmd_maxrobust(cli, file, background.as_deref()),
        Cmd::Rectify { file, background } => cmd_rectify(cli, file, background),
        Cmd::Export { file, format } => cmd_export(cli, file, *format),
        Cmd::ValidateCalculus { calculus } => cmd_validate_calculus(cli, calculus),
        Cmd::Gen { model, seed, name } => cmd_gen(cli, model, *seed, name),
    }
}

fn resolver_for(cli: &Cli) -> Result<CalculusResolver> {
    let mut resolver = CalculusResolver::new();
    if let Some(dirs) = env::var_os("QSTR_CALCULUS_PATH") {
        for dir in env::split_paths(&dirs) {
            resolver.add_search_dir(dir);
        }
    }
    if let Some(spec) = &cli.calculus {
        let path = Path::new(spec);
        let cal = if path.is_file() {
            load_calculus(path)?
        } else {
            resolver.resolve(spec)?
        };
        resolver.set_override(cal);
    }
    Ok(resolver)
}

fn load_document(cli: &Cli, file: &Path) -> Result<NetworkDocument> {
    let resolver = resolver_for(cli)?;
    let doc = parse_network_with(file, &resolver)?;
    if cli.verbose {
        eprintln!(
            "parsed network `{}`: {} variables over calculus `{}`",
            doc.name,
            doc.qcn.var_count(),
            doc.qcn.calculus().name()
        );
    }
    let cal = doc.qcn.calculus();
    if !cal.atomic_closure_decides() {
        eprintln!(
            "note: closure is not known to decide atomic networks over calculus `{}`; \
             consistency and scenario answers are closure-level",
            cal.name()
        );
    }
    Ok(doc)
}

fn emit(cli: &Cli, payload: &str) -> Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, payload)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{payload}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(cli, &text)
}

// Shared JSON shapes.

#[derive(Serialize)]
struct EdgeRelJson {
    from: String,
    to: String,
    relation: String,
}

#[derive(Serialize)]
struct ScenarioJson {
    edges: Vec<EdgeRelJson>,
}

#[derive(Serialize)]
struct ProbEntryJson {
    relation: String,
    p: f64,
}

#[derive(Serialize)]
struct EdgeScoreJson {
    from: String,
    to: String,
    relation: String,
    p: f64,
}

fn scenario_json(qcn: &Qcn) -> ScenarioJson {
    let vars = qcn.variables();
    let edges = qcn
        .unordered_pairs()
        .map(|(i, j)| EdgeRelJson {
            from: vars[i].clone(),
            to: vars[j].clone(),
            relation: qcn.constraint(i, j).names()[0].to_string(),
        })
        .collect();
    ScenarioJson { edges }
}

/// One scenario as a single human-readable line: `A B p; A C m`.
fn scenario_line(qcn: &Qcn) -> String {
    let vars = qcn.variables();
    let parts: Vec<String> = qcn
        .unordered_pairs()
        .map(|(i, j)| {
            format!(
                "{} {} {}",
                vars[i],
                vars[j],
                qcn.constraint(i, j).names()[0]
            )
        })
        .collect();
    parts.join("; ")
}

fn per_edge_json(report: &RobustnessReport) -> Vec<EdgeScoreJson> {
    let vars = report.refinement.variables();
    report
        .per_edge_probability
        .iter()
        .map(|&((i, j), p)| EdgeScoreJson {
            from: vars[i].clone(),
            to: vars[j].clone(),
            relation: report.refinement.constraint(i, j).names()[0].to_string(),
            p,
        })
        .collect()
}

fn per_edge_lines(report: &RobustnessReport) -> String {
    let vars = report.refinement.variables();
    let mut out = String::new();
    for &((i, j), p) in &report.per_edge_probability {
        let relation = report.refinement.constraint(i, j).names()[0];
        let _ = writeln!(out, "edge {} {}: {} p={}", vars[i], vars[j], relation, p);
    }
    out
}

fn warn_missing_edges(report: &RobustnessReport) {
    let vars = report.refinement.variables();
    for &(i, j) in &report.missing_edges {
        eprintln!(
            "warning: no probabilities for edge ({}, {}); treated as 0",
            vars[i], vars[j]
        );
    }
}

/// Probabilities for scoring: the file's own `prob` lines when present,
/// otherwise scenario-derived ones.
fn scoring_probabilities(doc: &NetworkDocument) -> Result<ProbabilisticQcn> {
    let pq = ProbabilisticQcn::from_document(doc)?;
    if pq.edge_dist().is_empty() {
        Ok(pq.with_scenario_probabilities()?)
    } else {
        Ok(pq)
    }
}

/// Rebuild a document from a probabilistic network so it can be written in
/// the network file format. Only positive probabilities are listed.
fn document_of(pq: &ProbabilisticQcn, name: &str) -> NetworkDocument {
    let mut doc = NetworkDocument::new(name, pq.qcn().clone());
    for (i, j) in pq.edge_dist().edges().collect::<Vec<_>>() {
        let dense = pq.edge_dist().edge(i, j).unwrap();
        let entries: Vec<(usize, f64)> = dense
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(b, p)| (b, p.as_f64()))
            .collect();
        doc.probs.push(ProbAnnotation { i, j, entries });
    }
    for (variable, labels) in pq.label_dist().iter().enumerate() {
        if !labels.is_empty() {
            doc.labels.push(LabelAnnotation {
                variable,
                entries: labels.clone(),
            });
        }
    }
    doc
}

// check

#[derive(Serialize)]
struct CheckJson {
    network: String,
    consistent: bool,
    revisions: usize,
}

fn cmd_check(cli: &Cli, file: &Path) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let result = a_closure(&doc.qcn);
    if cli.json {
        emit_json(
            cli,
            &CheckJson {
                network: doc.name.clone(),
                consistent: result.consistent,
                revisions: result.revisions,
            },
        )?;
    } else {
        let verdict = if result.consistent {
            "CONSISTENT"
        } else {
            "INCONSISTENT"
        };
        emit(cli, &format!("{verdict}\nrevisions: {}\n", result.revisions))?;
    }
    Ok(if result.consistent {
        Outcome::Success
    } else {
        Outcome::Unsat
    })
}

// solve

#[derive(Serialize)]
struct SolveJson {
    network: String,
    satisfiable: bool,
    scenario: Option<ScenarioJson>,
}

fn cmd_solve(cli: &Cli, file: &Path) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let found = solve(&doc.qcn);
    if cli.json {
        emit_json(
            cli,
            &SolveJson {
                network: doc.name.clone(),
                satisfiable: found.is_some(),
                scenario: found.as_ref().map(|s| scenario_json(s.qcn())),
            },
        )?;
    } else {
        match &found {
            Some(s) => {
                let out = NetworkDocument::new(&doc.name, s.qcn().clone());
                emit(cli, &out.to_text())?;
            }
            None => emit(cli, "UNSAT\n")?,
        }
    }
    Ok(if found.is_some() {
        Outcome::Success
    } else {
        Outcome::Unsat
    })
}

// scenarios

#[derive(Serialize)]
struct ScenariosJson {
    network: String,
    count: usize,
    scenarios: Vec<ScenarioJson>,
}

fn cmd_scenarios(cli: &Cli, file: &Path, limit: Option<usize>) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let scenarios = if cli.jobs.map_or(false, |j| j > 1) {
        enumerate_scenarios_parallel(&doc.qcn, limit)
    } else {
        enumerate_scenarios(&doc.qcn, limit)
    };
    if cli.json {
        emit_json(
            cli,
            &ScenariosJson {
                network: doc.name.clone(),
                count: scenarios.len(),
                scenarios: scenarios.iter().map(|s| scenario_json(s.qcn())).collect(),
            },
        )?;
    } else {
        let mut out = format!("scenarios: {}\n", scenarios.len());
        for s in &scenarios {
            out.push_str(&scenario_line(s.qcn()));
            out.push('\n');
        }
        emit(cli, &out)?;
    }
    Ok(if scenarios.is_empty() {
        Outcome::Unsat
    } else {
        Outcome::Success
    })
}

// probs

#[derive(Serialize)]
struct EdgeProbsJson {
    from: String,
    to: String,
    probabilities: Vec<ProbEntryJson>,
}

#[derive(Serialize)]
struct ProbsJson {
    network: String,
    edges: Vec<EdgeProbsJson>,
}

fn cmd_probs(cli: &Cli, file: &Path) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let pq = ProbabilisticQcn::from_scenarios(&doc.qcn)?;
    let qcn = pq.qcn();
    let vars = qcn.variables();
    let cal = qcn.calculus();
    let mut edges = Vec::new();
    for (i, j) in qcn.unordered_pairs() {
        let dense = pq.edge_dist().edge(i, j).unwrap();
        let probabilities: Vec<ProbEntryJson> = dense
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(b, p)| ProbEntryJson {
                relation: cal.base_relation_name(b).to_string(),
                p: p.as_f64(),
            })
            .collect();
        edges.push(EdgeProbsJson {
            from: vars[i].clone(),
            to: vars[j].clone(),
            probabilities,
        });
    }
    if cli.json {
        emit_json(
            cli,
            &ProbsJson {
                network: doc.name.clone(),
                edges,
            },
        )?;
    } else {
        let mut out = String::new();
        for edge in &edges {
            let entries: Vec<String> = edge
                .probabilities
                .iter()
                .map(|e| format!("{}:{}", e.relation, e.p))
                .collect();
            let _ = writeln!(
                out,
                "prob {} {} {{ {} }}",
                edge.from,
                edge.to,
                entries.join(" ")
            );
        }
        emit(cli, &out)?;
    }
    Ok(Outcome::Success)
}

// robustness

#[derive(Serialize)]
struct RobustnessJson {
    network: String,
    refinement: String,
    robustness: f64,
    satisfiable: bool,
    per_edge: Vec<EdgeScoreJson>,
    missing_edges: Vec<[String; 2]>,
}

fn cmd_robustness(cli: &Cli, file: &Path, refinement: &Path) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let refinement_doc = load_document(cli, refinement)?;
    let pq = scoring_probabilities(&doc)?;
    let report = pq.robustness_of(&refinement_doc.qcn)?;
    warn_missing_edges(&report);
    if cli.json {
        let vars = report.refinement.variables();
        emit_json(
            cli,
            &RobustnessJson {
                network: doc.name.clone(),
                refinement: refinement_doc.name.clone(),
                robustness: report.robustness,
                satisfiable: report.satisfiable,
                per_edge: per_edge_json(&report),
                missing_edges: report
                    .missing_edges
                    .iter()
                    .map(|&(i, j)| [vars[i].clone(), vars[j].clone()])
                    .collect(),
            },
        )?;
    } else {
        let mut out = format!(
            "refinement: {}\nrobustness: {}\nsatisfiable: {}\n",
            refinement_doc.name, report.robustness, report.satisfiable
        );
        out.push_str(&per_edge_lines(&report));
        emit(cli, &out)?;
    }
    Ok(if report.satisfiable {
        Outcome::Success
    } else {
        Outcome::Unsat
    })
}

// maxrobust

#[derive(Serialize)]
struct MaxRobustJson {
    network: String,
    found: bool,
    robustness: Option<f64>,
    per_edge: Vec<EdgeScoreJson>,
    scenario: Option<ScenarioJson>,
}

fn cmd_maxrobust(cli: &Cli, file: &Path, background: Option<&Path>) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let mut qcn = doc.qcn.clone();
    if let Some(bg_path) = background {
        let bg = load_document(cli, bg_path)?;
        if bg.qcn.variables() != qcn.variables() {
            return Err(QstrError::VariableMismatch.into());
        }
        for (i, j) in bg.qcn.unordered_pairs() {
            qcn.refine(i, j, bg.qcn.constraint(i, j))?;
        }
    }
    let pq = scoring_probabilities(&doc)?;
    let report = max_robust_scenario(&qcn, pq.edge_dist())?;
    if cli.json {
        emit_json(
            cli,
            &MaxRobustJson {
                network: doc.name.clone(),
                found: report.is_some(),
                robustness: report.as_ref().map(|r| r.robustness),
                per_edge: report.as_ref().map(per_edge_json).unwrap_or_default(),
                scenario: report.as_ref().map(|r| scenario_json(&r.refinement)),
            },
        )?;
    } else {
        match &report {
            Some(r) => {
                let mut out = format!("robustness: {}\n", r.robustness);
                out.push_str(&per_edge_lines(r));
                out.push_str(&NetworkDocument::new(&doc.name, r.refinement.clone()).to_text());
                emit(cli, &out)?;
            }
            None => emit(cli, "UNSAT\n")?,
        }
    }
    Ok(if report.is_some() {
        Outcome::Success
    } else {
        Outcome::Unsat
    })
}

// rectify

#[derive(Serialize)]
struct ConstraintJson {
    from: String,
    to: String,
    relations: Vec<String>,
    probabilities: Option<Vec<ProbEntryJson>>,
}

#[derive(Serialize)]
struct LabelsJson {
    variable: String,
    labels: Vec<LabelEntryJson>,
}

#[derive(Serialize)]
struct LabelEntryJson {
    label: String,
    p: f64,
}

#[derive(Serialize)]
struct RectifyJson {
    network: String,
    calculus: String,
    variables: Vec<String>,
    constraints: Vec<ConstraintJson>,
    labels: Vec<LabelsJson>,
}

fn cmd_rectify(cli: &Cli, file: &Path, background: &Path) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let bg = load_document(cli, background)?;
    let pq = ProbabilisticQcn::from_document(&doc)?;
    let rectified = rectify(&pq, &bg.qcn)?;
    if cli.json {
        let qcn = rectified.qcn();
        let vars = qcn.variables();
        let constraints = qcn
            .unordered_pairs()
            .map(|(i, j)| {
                let probabilities = rectified.edge_dist().edge(i, j).map(|dense| {
                    dense
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| p.is_positive())
                        .map(|(b, p)| ProbEntryJson {
                            relation: qcn.calculus().base_relation_name(b).to_string(),
                            p: p.as_f64(),
                        })
                        .collect()
                });
                ConstraintJson {
                    from: vars[i].clone(),
                    to: vars[j].clone(),
                    relations: qcn
                        .constraint(i, j)
                        .names()
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    probabilities,
                }
            })
            .collect();
        let labels = rectified
            .label_dist()
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(v, l)| LabelsJson {
                variable: vars[v].clone(),
                labels: l
                    .iter()
                    .map(|(label, p)| LabelEntryJson {
                        label: label.clone(),
                        p: *p,
                    })
                    .collect(),
            })
            .collect();
        emit_json(
            cli,
            &RectifyJson {
                network: doc.name.clone(),
                calculus: qcn.calculus().name().to_string(),
                variables: vars.to_vec(),
                constraints,
                labels,
            },
        )?;
    } else {
        emit(cli, &document_of(&rectified, &doc.name).to_text())?;
    }
    Ok(Outcome::Success)
}

// export

#[derive(Serialize)]
struct ExportJson {
    network: String,
    format: &'static str,
    text: String,
}

fn cmd_export(cli: &Cli, file: &Path, format: ExportFormat) -> Result<Outcome> {
    let doc = load_document(cli, file)?;
    let text = match format {
        ExportFormat::Dot => doc.qcn.to_dot(&doc.name),
        ExportFormat::Asp => to_asp_facts(&doc.qcn, &doc.name).to_text(),
        ExportFormat::Neurasp => {
            let pq = ProbabilisticQcn::from_document(&doc)?;
            to_neurasp_atoms(&pq, &doc.name).to_text()
        }
    };
    if cli.json {
        emit_json(
            cli,
            &ExportJson {
                network: doc.name.clone(),
                format: format.tag(),
                text,
            },
        )?;
    } else {
        emit(cli, &text)?;
    }
    Ok(Outcome::Success)
}

// validate-calculus

#[derive(Serialize)]
struct ViolationJson {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ValidateJson {
    calculus: String,
    base_relations: usize,
    violations: Vec<ViolationJson>,
}

fn violation_kind_tag(kind: ViolationKind) -> &'static str {
    match kind {
        ViolationKind::ConverseInvolution => "converse-involution",
        ViolationKind::IdentityLaw => "identity-law",
        ViolationKind::Duality => "duality",
    }
}

fn cmd_validate_calculus(cli: &Cli, spec: &str) -> Result<Outcome> {
    let path = Path::new(spec);
    let cal: Arc<Calculus> = if path.is_file() {
        load_calculus(path)?
    } else {
        let mut resolver = CalculusResolver::new();
        if let Some(dirs) = env::var_os("QSTR_CALCULUS_PATH") {
            for dir in env::split_paths(&dirs) {
                resolver.add_search_dir(dir);
            }
        }
        resolver.resolve(spec)?
    };
    let violations = validate_calculus(&cal);
    if cli.json {
        emit_json(
            cli,
            &ValidateJson {
                calculus: cal.name().to_string(),
                base_relations: cal.len(),
                violations: violations
                    .iter()
                    .map(|v| ViolationJson {
                        kind: violation_kind_tag(v.kind),
                        message: v.message.clone(),
                    })
                    .collect(),
            },
        )?;
    } else if violations.is_empty() {
        emit(
            cli,
            &format!(
                "calculus {}: OK\nbase relations: {}\n",
                cal.name(),
                cal.len()
            ),
        )?;
    } else {
        let mut out = format!("calculus {}: {} violations\n", cal.name(), violations.len());
        for v in &violations {
            let _ = writeln!(out, "{}: {}", violation_kind_tag(v.kind), v.message);
        }
        emit(cli, &out)?;
    }
    Ok(if violations.is_empty() {
        Outcome::Success
    } else {
        Outcome::Unsat
    })
}

// gen

#[derive(Serialize)]
struct GenJson {
    name: String,
    calculus: String,
    variables: usize,
    density: f64,
    label_size: usize,
    seed: u64,
    text: String,
}

fn cmd_gen(cli: &Cli, model: &Model, seed: u64, name: &str) -> Result<Outcome> {
    let spec = cli
        .calculus
        .as_ref()
        .ok_or_else(|| anyhow!("gen needs --calculus to pick the relation system"))?;
    let resolver = resolver_for(cli)?;
    let cal = resolver.resolve(spec)?;
    let random_model = RandomModel::new(model.variables, model.density, model.label_size)?;
    let qcn = random_qcn(&cal, &random_model, seed)?;
    let text = NetworkDocument::new(name, qcn).to_text();
    if cli.json {
        emit_json(
            cli,
            &GenJson {
                name: name.to_string(),
                calculus: cal.name().to_string(),
                variables: model.variables,
                density: model.density,
                label_size: model.label_size,
                seed,
                text,
            },
        )?;
    } else {
        emit(cli, &text)?;
    }
    Ok(Outcome::Success)
}
