//! Qualitative constraint networks: a finite set of variables and a mapping
//! assigning a relation to every ordered variable pair.
//!
//! Networks keep two invariants at all times: the diagonal is exactly the
//! identity relation, and the entry at (j, i) is the converse of the entry
//! at (i, j). Both are enforced at write time, so solvers can assume them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::algebra::{Calculus, Relation};
use crate::calculi::{builtin, load_calculus, BUILTIN_NAMES};
use crate::error::{Error, Result};
use crate::textio::tokenize;

/// A qualitative constraint network over one calculus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qcn {
    calculus: Arc<Calculus>,
    variables: Vec<String>,
    /// Row-major n x n matrix.
    constraints: Vec<Relation>,
}

impl Qcn {
    /// Creates a network with every off-diagonal constraint universal
    /// (complete uncertainty) and the diagonal fixed to the identity.
    pub fn new(
        calculus: &Arc<Calculus>,
        variable_names: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        let variables: Vec<String> = variable_names.into_iter().map(Into::into).collect();
        if variables.is_empty() {
            return Err(Error::NoVariables);
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        let n = variables.len();
        let universal = Relation::universal(calculus);
        let identity = Relation::identity(calculus);
        let mut constraints = vec![universal; n * n];
        for i in 0..n {
            constraints[i * n + i] = identity.clone();
        }
        Ok(Qcn {
            calculus: Arc::clone(calculus),
            variables,
            constraints,
        })
    }

    pub fn calculus(&self) -> &Arc<Calculus> {
        &self.calculus
    }

    /// Number of variables n.
    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn constraint(&self, i: usize, j: usize) -> &Relation {
        &self.constraints[i * self.variables.len() + j]
    }

    /// Writes `r` at (i, j) and its converse at (j, i). The diagonal can
    /// only be written with the identity relation (a no-op).
    pub fn set_constraint(&mut self, i: usize, j: usize, r: Relation) -> Result<()> {
        self.check_relation(&r)?;
        if i == j {
            if r == Relation::identity(&self.calculus) {
                return Ok(());
            }
            return Err(Error::DiagonalNotIdentity);
        }
        let n = self.variables.len();
        self.constraints[j * n + i] = r.converse();
        self.constraints[i * n + j] = r;
        Ok(())
    }

    /// Intersects the constraint at (i, j) with `r`, updating (j, i) to
    /// match. Never grows a constraint; an empty result is legal and marks
    /// the network trivially inconsistent. Refining the diagonal is only
    /// allowed when it leaves the identity in place.
    pub fn refine(&mut self, i: usize, j: usize, r: &Relation) -> Result<()> {
        self.check_relation(r)?;
        if i == j {
            if r.contains(self.calculus.identity()) {
                return Ok(());
            }
            return Err(Error::DiagonalNotIdentity);
        }
        let tightened = self.constraint(i, j).intersect(r)?;
        self.set_constraint(i, j, tightened)
    }

    /// Write without the calculus and diagonal checks, for solver-internal
    /// updates where the relation provably comes from this network's own
    /// calculus and i != j. Converse-consistency is still maintained.
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, r: Relation) {
        let n = self.variables.len();
        self.constraints[j * n + i] = r.converse();
        self.constraints[i * n + j] = r;
    }

    fn check_relation(&self, r: &Relation) -> Result<()> {
        if Arc::ptr_eq(r.calculus(), &self.calculus) || **r.calculus() == *self.calculus {
            Ok(())
        } else {
            Err(Error::CalculusMismatch {
                left: self.calculus.name().to_string(),
                right: r.calculus().name().to_string(),
            })
        }
    }

    /// True iff some entry is the empty relation.
    pub fn has_empty_constraint(&self) -> bool {
        self.constraints.iter().any(Relation::is_empty)
    }

    /// All unordered variable pairs (i, j) with i < j, lexicographic.
    pub fn unordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.variables.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    /// True iff every off-diagonal entry is a single base relation.
    pub fn is_atomic(&self) -> bool {
        self.unordered_pairs()
            .all(|(i, j)| self.constraint(i, j).is_atomic())
    }

    /// Checks the three structural invariants: identity diagonal,
    /// converse-consistency, and that every entry belongs to this network's
    /// calculus. Returns a description of the first breach found.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let n = self.variables.len();
        let identity = Relation::identity(&self.calculus);
        for i in 0..n {
            if *self.constraint(i, i) != identity {
                return Err(format!("diagonal entry ({i}, {i}) is not the identity"));
            }
            for j in 0..n {
                let r = self.constraint(i, j);
                if **r.calculus() != *self.calculus {
                    return Err(format!("entry ({i}, {j}) belongs to a different calculus"));
                }
                if *self.constraint(j, i) != r.converse() {
                    return Err(format!("entries ({i}, {j}) and ({j}, {i}) are not converses"));
                }
            }
        }
        Ok(())
    }

    /// Renders the network as a DOT digraph: one node per variable, one
    /// directed edge per unordered pair labeled with the relation members
    /// joined by `|`. Universal edges are omitted, matching the convention
    /// of drawing nothing where nothing is known.
    pub fn to_dot(&self, graph_name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{graph_name}\" {{");
        for v in &self.variables {
            let _ = writeln!(out, "  \"{v}\";");
        }
        for (i, j) in self.unordered_pairs() {
            let r = self.constraint(i, j);
            if r.is_universal() {
                continue;
            }
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                self.variables[i],
                self.variables[j],
                r.names().join("|")
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Raw `prob` line from a network file: probabilities over base relations
/// for one edge, in file order. Distribution-level validation (sums,
/// support) happens in the probabilistic module.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbAnnotation {
    pub i: usize,
    pub j: usize,
    /// (base relation index, probability) pairs.
    pub entries: Vec<(usize, f64)>,
}

/// Raw `label` line from a network file: per-variable class labels with
/// confidences, as produced by a perception component.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAnnotation {
    pub variable: usize,
    pub entries: Vec<(String, f64)>,
}

/// A parsed network file: the constraint network plus its optional
/// probability and label annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDocument {
    pub name: String,
    pub qcn: Qcn,
    pub probs: Vec<ProbAnnotation>,
    pub labels: Vec<LabelAnnotation>,
}

impl NetworkDocument {
    pub fn new(name: impl Into<String>, qcn: Qcn) -> Self {
        NetworkDocument {
            name: name.into(),
            qcn,
            probs: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Canonical text form: constraints for non-universal pairs i < j in
    /// lexicographic index order, then prob lines, then label lines.
    /// Parsing the output reproduces the document.
    pub fn to_text(&self) -> String {
        let qcn = &self.qcn;
        let mut out = String::new();
        let _ = writeln!(out, "network {} calculus {}", self.name, qcn.calculus().name());
        let _ = writeln!(out, "vars {}", qcn.variables().join(" "));
        for (i, j) in qcn.unordered_pairs() {
            let r = qcn.constraint(i, j);
            if r.is_universal() {
                continue;
            }
            let names = r.names();
            if names.is_empty() {
                let _ = writeln!(out, "{} {} ( )", qcn.variables()[i], qcn.variables()[j]);
            } else {
                let _ = writeln!(
                    out,
                    "{} {} ( {} )",
                    qcn.variables()[i],
                    qcn.variables()[j],
                    names.join(" ")
                );
            }
        }
        for p in &self.probs {
            let entries: Vec<String> = p
                .entries
                .iter()
                .map(|&(b, v)| format!("{}:{}", qcn.calculus().base_relation_name(b), v))
                .collect();
            let _ = writeln!(
                out,
                "prob {} {} {{ {} }}",
                qcn.variables()[p.i],
                qcn.variables()[p.j],
                entries.join(" ")
            );
        }
        for l in &self.labels {
            let entries: Vec<String> = l
                .entries
                .iter()
                .map(|(name, v)| format!("{name}:{v}"))
                .collect();
            let _ = writeln!(out, "label {} {{ {} }}", qcn.variables()[l.variable], entries.join(" "));
        }
        out
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Writes a bare network (no annotations) in the network file format.
pub fn write_network(qcn: &Qcn, name: &str, path: impl AsRef<Path>) -> Result<()> {
    NetworkDocument::new(name, qcn.clone()).write_to(path)
}

/// Maps calculus names in network files to calculi. Built-in names always
/// resolve; other names are looked up as `<name>.cal` in the search
/// directories, first hit wins. An override calculus, when set, wins over
/// everything (used by the CLI's `--calculus` flag).
#[derive(Debug, Clone, Default)]
pub struct CalculusResolver {
    search_dirs: Vec<PathBuf>,
    override_calculus: Option<Arc<Calculus>>,
}

impl CalculusResolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_search_dir(&mut self, dir: impl Into<PathBuf>) -> &mut Self {
        self.search_dirs.push(dir.into());
        self
    }

    pub fn set_override(&mut self, calculus: Arc<Calculus>) -> &mut Self {
        self.override_calculus = Some(calculus);
        self
    }

    pub fn resolve(&self, name: &str) -> Result<Arc<Calculus>> {
        if let Some(c) = &self.override_calculus {
            return Ok(Arc::clone(c));
        }
        if BUILTIN_NAMES.contains(&name) {
            return builtin(name);
        }
        for dir in &self.search_dirs {
            let candidate = dir.join(format!("{name}.cal"));
            if candidate.is_file() {
                return load_calculus(candidate);
            }
        }
        Err(Error::UnknownCalculus(name.to_string()))
    }
}

/// Parses a network file. Calculus names resolve to the built-ins or to
/// `<name>.cal` files next to the network file.
pub fn parse_network(path: impl AsRef<Path>) -> Result<NetworkDocument> {
    parse_network_with(path, &CalculusResolver::new())
}

/// Parses a network file with extra calculus search directories or an
/// override; the network file's own directory is searched last.
pub fn parse_network_with(path: impl AsRef<Path>, resolver: &CalculusResolver) -> Result<NetworkDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut resolver = resolver.clone();
    if let Some(parent) = path.parent() {
        resolver.add_search_dir(parent);
    }
    parse_network_str(&text, &path.display().to_string(), &resolver)
}

/// Parses network text; `origin` names the source in error messages.
pub fn parse_network_str(text: &str, origin: &str, resolver: &CalculusResolver) -> Result<NetworkDocument> {
    let err = |line: usize, col: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        col,
        message,
    };

    const RESERVED: [&str; 5] = ["network", "vars", "prob", "label", "calculus"];

    let mut name = String::new();
    let mut qcn: Option<Qcn> = None;
    let mut probs: Vec<ProbAnnotation> = Vec::new();
    let mut labels: Vec<LabelAnnotation> = Vec::new();
    let mut seen_pairs: Vec<(usize, usize)> = Vec::new();
    let mut header_done = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize(raw);
        let Some(&(dir_col, directive)) = toks.first() else {
            continue;
        };

        if !header_done {
            if directive != "network" || toks.len() != 4 || toks[2].1 != "calculus" {
                return Err(err(
                    line_no,
                    dir_col,
                    "expected `network <name> calculus <calcname>`".into(),
                ));
            }
            name = toks[1].1.to_string();
            let calculus = resolver.resolve(toks[3].1)?;
            header_done = true;
            // Hold the calculus until the vars line arrives.
            qcn = Some(Qcn {
                calculus,
                variables: Vec::new(),
                constraints: Vec::new(),
            });
            continue;
        }
        let net = qcn.as_mut().unwrap();

        if net.variables.is_empty() {
            if directive != "vars" || toks.len() < 2 {
                return Err(err(line_no, dir_col, "expected `vars <v1> <v2> ...`".into()));
            }
            for &(col, tok) in &toks[1..] {
                if RESERVED.contains(&tok) || tok.contains(['(', ')', '{', '}', ':']) {
                    return Err(err(line_no, col, format!("bad variable name `{tok}`")));
                }
            }
            let calculus = Arc::clone(&net.calculus);
            *net = Qcn::new(&calculus, toks[1..].iter().map(|&(_, t)| t)).map_err(|e| match e {
                Error::DuplicateVariable(v) => {
                    let col = toks.iter().find(|&&(_, t)| t == v).map_or(dir_col, |&(c, _)| c);
                    err(line_no, col, format!("duplicate variable `{v}`"))
                }
                other => other,
            })?;
            continue;
        }

        let lookup_var = |col: usize, tok: &str| -> Result<usize> {
            net.variable_index(tok)
                .ok_or_else(|| err(line_no, col, format!("unknown variable `{tok}`")))
        };
        let lookup_rel = |col: usize, tok: &str| -> Result<usize> {
            net.calculus.base_relation_index(tok).ok_or_else(|| {
                err(
                    line_no,
                    col,
                    format!("relation `{tok}` is not part of calculus `{}`", net.calculus.name()),
                )
            })
        };
        match directive {
            "prob" => {
                let shaped = toks.len() >= 5 && toks[3].1 == "{" && toks.last().unwrap().1 == "}";
                if !shaped {
                    return Err(err(
                        line_no,
                        dir_col,
                        "expected `prob <vi> <vj> { <r>:<p> ... }`".into(),
                    ));
                }
                let i = lookup_var(toks[1].0, toks[1].1)?;
                let j = lookup_var(toks[2].0, toks[2].1)?;
                if i == j {
                    return Err(err(line_no, toks[1].0, "prob needs two distinct variables".into()));
                }
                if probs.iter().any(|p| (p.i, p.j) == (i, j) || (p.j, p.i) == (i, j)) {
                    return Err(err(
                        line_no,
                        dir_col,
                        format!("duplicate prob block for ({}, {})", toks[1].1, toks[2].1),
                    ));
                }
                let mut entries = Vec::new();
                for &(col, tok) in &toks[4..toks.len() - 1] {
                    let (rel, p) = parse_prob_entry(origin, line_no, col, tok)?;
                    let b = lookup_rel(col, rel)?;
                    if entries.iter().any(|&(existing, _)| existing == b) {
                        return Err(err(line_no, col, format!("duplicate relation `{rel}` in prob block")));
                    }
                    entries.push((b, p));
                }
                probs.push(ProbAnnotation { i, j, entries });
            }
            "label" => {
                let shaped = toks.len() >= 4 && toks[2].1 == "{" && toks.last().unwrap().1 == "}";
                if !shaped {
                    return Err(err(line_no, dir_col, "expected `label <v> { <name>:<p> ... }`".into()));
                }
                let variable = lookup_var(toks[1].0, toks[1].1)?;
                if labels.iter().any(|l| l.variable == variable) {
                    return Err(err(line_no, dir_col, format!("duplicate label block for `{}`", toks[1].1)));
                }
                let mut entries = Vec::new();
                for &(col, tok) in &toks[3..toks.len() - 1] {
                    let (label, p) = parse_prob_entry(origin, line_no, col, tok)?;
                    if entries.iter().any(|(existing, _)| existing == label) {
                        return Err(err(line_no, col, format!("duplicate label `{label}`")));
                    }
                    entries.push((label.to_string(), p));
                }
                labels.push(LabelAnnotation { variable, entries });
            }
            _ => {
                // Constraint line: `<vi> <vj> ( <r1> <r2> ... )`.
                let shaped = toks.len() >= 4 && toks[2].1 == "(" && toks.last().unwrap().1 == ")";
                if !shaped {
                    return Err(err(
                        line_no,
                        dir_col,
                        "expected `<vi> <vj> ( <r1> <r2> ... )`, `prob`, or `label`".into(),
                    ));
                }
                let i = lookup_var(toks[0].0, toks[0].1)?;
                let j = lookup_var(toks[1].0, toks[1].1)?;
                if i == j {
                    return Err(err(line_no, toks[0].0, "constraint needs two distinct variables".into()));
                }
                if seen_pairs.contains(&(i.min(j), i.max(j))) {
                    return Err(err(
                        line_no,
                        dir_col,
                        format!("duplicate constraint for ({}, {})", toks[0].1, toks[1].1),
                    ));
                }
                seen_pairs.push((i.min(j), i.max(j)));
                let mut bits = 0u64;
                for &(col, tok) in &toks[3..toks.len() - 1] {
                    bits |= 1u64 << lookup_rel(col, tok)?;
                }
                let calculus = Arc::clone(&net.calculus);
                let r = Relation::from_bits(&calculus, bits).expect("bits come from the calculus");
                net.set_constraint(i, j, r)?;
            }
        }
    }

    let Some(qcn) = qcn else {
        return Err(err(1, 1, "empty file: expected `network <name> calculus <calcname>`".into()));
    };
    if qcn.variables.is_empty() {
        return Err(err(text.lines().count() + 1, 1, "missing `vars` line".into()));
    }
    Ok(NetworkDocument { name, qcn, probs, labels })
}

/// Parses one `name:prob` entry token from a prob or label block.
fn parse_prob_entry<'t>(origin: &str, line: usize, col: usize, tok: &'t str) -> Result<(&'t str, f64)> {
    let err = |message: String| Error::Parse {
        path: origin.to_string(),
        line,
        col,
        message,
    };
    let bad = || err(format!("malformed probability entry `{tok}`, expected `name:p`"));
    let (lhs, rhs) = tok.split_once(':').ok_or_else(bad)?;
    if lhs.is_empty() || rhs.contains(':') {
        return Err(bad());
    }
    let p: f64 = rhs.parse().map_err(|_| bad())?;
    if !(0.0..=1.0).contains(&p) {
        return Err(err(format!("probability {p} outside [0, 1]")));
    }
    Ok((lhs, p))
}
