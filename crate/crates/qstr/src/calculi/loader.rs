//! Parser for calculus-definition files and law-level table validation.
//!
//! The file format is line oriented:
//!
//! ```text
//! calculus <name>
//! domain "<free text>"
//! relations <r1> <r2> ... <rk>
//! identity <ri>
//! converse <r> <rconv>          # one line per base relation
//! compose <r1> <r2> = ( <s1> <s2> ... )   # one line per ordered pair
//! ```
//!
//! `#` begins a comment; blank lines are ignored. Parse errors carry the
//! source name, line, and column.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::algebra::Calculus;
use crate::error::{Error, Result};
use crate::textio::tokenize;

/// Reads a calculus definition from a file. Loaded calculi default to
/// `atomic_closure_decides = false`; flip the flag with
/// [`Calculus::with_atomic_closure_decides`] when outside theory justifies it.
pub fn load_calculus(path: impl AsRef<Path>) -> Result<Arc<Calculus>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_calculus_str(&text, &path.display().to_string()).map(Arc::new)
}

/// Parses a calculus definition from text. `origin` names the source in
/// error messages (a path, or a label such as `<builtin>`).
pub fn parse_calculus_str(text: &str, origin: &str) -> Result<Calculus> {
    let err = |line: usize, col: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        col,
        message,
    };

    #[derive(PartialEq)]
    enum Stage {
        Name,
        Domain,
        Relations,
        Identity,
        Maps,
    }

    let mut stage = Stage::Name;
    let mut name = String::new();
    let mut domain = String::new();
    let mut relations: Vec<String> = Vec::new();
    let mut identity = 0usize;
    let mut converse: Vec<Option<usize>> = Vec::new();
    let mut composition: Vec<Option<u64>> = Vec::new();
    let mut line_count = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        line_count = line_no;
        let toks = tokenize(raw);
        let Some(&(dir_col, directive)) = toks.first() else {
            continue;
        };

        // Resolves a relation-name token to its index.
        let lookup = |col: usize, tok: &str| -> Result<usize> {
            relations
                .iter()
                .position(|r| r == tok)
                .ok_or_else(|| err(line_no, col, format!("unknown relation `{tok}`")))
        };

        match stage {
            Stage::Name => {
                if directive != "calculus" || toks.len() != 2 {
                    return Err(err(line_no, dir_col, "expected `calculus <name>`".into()));
                }
                name = toks[1].1.to_string();
                stage = Stage::Domain;
            }
            Stage::Domain => {
                if directive != "domain" {
                    return Err(err(line_no, dir_col, "expected `domain \"<text>\"`".into()));
                }
                // Quotes are found on the raw line so the free text may
                // contain `#` without starting a comment.
                let open = raw
                    .find('"')
                    .ok_or_else(|| err(line_no, dir_col, "domain text must be double-quoted".into()))?;
                let close = raw[open + 1..]
                    .find('"')
                    .ok_or_else(|| err(line_no, open + 2, "unterminated domain text".into()))?;
                domain = raw[open + 1..open + 1 + close].to_string();
                let tail = raw[open + close + 2..].trim_start();
                if !(tail.is_empty() || tail.starts_with('#')) {
                    return Err(err(line_no, open + close + 3, "trailing text after domain".into()));
                }
                stage = Stage::Relations;
            }
            Stage::Relations => {
                if directive != "relations" || toks.len() < 2 {
                    return Err(err(line_no, dir_col, "expected `relations <r1> <r2> ...`".into()));
                }
                for &(col, tok) in &toks[1..] {
                    if relations.iter().any(|r| r == tok) {
                        return Err(err(line_no, col, format!("duplicate relation name `{tok}`")));
                    }
                    relations.push(tok.to_string());
                }
                converse = vec![None; relations.len()];
                composition = vec![None; relations.len() * relations.len()];
                stage = Stage::Identity;
            }
            Stage::Identity => {
                if directive != "identity" || toks.len() != 2 {
                    return Err(err(line_no, dir_col, "expected `identity <r>`".into()));
                }
                identity = lookup(toks[1].0, toks[1].1)?;
                stage = Stage::Maps;
            }
            Stage::Maps => match directive {
                "converse" => {
                    if toks.len() != 3 {
                        return Err(err(line_no, dir_col, "expected `converse <r> <rconv>`".into()));
                    }
                    let r = lookup(toks[1].0, toks[1].1)?;
                    let rc = lookup(toks[2].0, toks[2].1)?;
                    if converse[r].is_some() {
                        return Err(err(
                            line_no,
                            toks[1].0,
                            format!("duplicate converse entry for `{}`", toks[1].1),
                        ));
                    }
                    converse[r] = Some(rc);
                }
                "compose" => {
                    let shaped = toks.len() >= 6
                        && toks[3].1 == "="
                        && toks[4].1 == "("
                        && toks.last().unwrap().1 == ")";
                    if !shaped {
                        return Err(err(
                            line_no,
                            dir_col,
                            "expected `compose <r1> <r2> = ( <s...> )`".into(),
                        ));
                    }
                    let r1 = lookup(toks[1].0, toks[1].1)?;
                    let r2 = lookup(toks[2].0, toks[2].1)?;
                    let mut bits = 0u64;
                    for &(col, tok) in &toks[5..toks.len() - 1] {
                        bits |= 1u64 << lookup(col, tok)?;
                    }
                    let slot = &mut composition[r1 * relations.len() + r2];
                    if slot.is_some() {
                        return Err(err(
                            line_no,
                            toks[1].0,
                            format!("duplicate composition entry ({}, {})", toks[1].1, toks[2].1),
                        ));
                    }
                    *slot = Some(bits);
                }
                other => {
                    return Err(err(
                        line_no,
                        dir_col,
                        format!("expected `converse` or `compose`, found `{other}`"),
                    ));
                }
            },
        }
    }

    let eof = line_count + 1;
    if stage != Stage::Maps {
        return Err(err(eof, 1, "unexpected end of file before the calculus was complete".into()));
    }
    for (i, c) in converse.iter().enumerate() {
        if c.is_none() {
            return Err(err(eof, 1, format!("missing converse entry for `{}`", relations[i])));
        }
    }
    let n = relations.len();
    for r1 in 0..n {
        for r2 in 0..n {
            if composition[r1 * n + r2].is_none() {
                return Err(err(
                    eof,
                    1,
                    format!(
                        "incomplete composition table: missing entry ({}, {})",
                        relations[r1], relations[r2]
                    ),
                ));
            }
        }
    }

    Calculus::new(
        name,
        domain,
        relations,
        identity,
        converse.into_iter().map(Option::unwrap).collect(),
        composition.into_iter().map(Option::unwrap).collect(),
        false,
    )
}

/// Which algebraic law a table entry breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// converse(converse(b)) != b for some base relation.
    ConverseInvolution,
    /// Id is not self-converse, or some compose(Id, b) / compose(b, Id) != {b}.
    IdentityLaw,
    /// converse(compose(b1, b2)) != compose(converse(b2), converse(b1)).
    Duality,
}

/// One broken law together with the offending entry, human-readable.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks the converse and composition tables against the laws every
/// qualitative calculus must satisfy: converse involution, the identity
/// laws, and converse/composition duality. Returns every violated entry;
/// an empty result means the tables are law-consistent (it does not prove
/// the calculus has a model).
pub fn validate_calculus(cal: &Calculus) -> Vec<Violation> {
    let n = cal.len();
    let name = |i: usize| cal.base_relation_name(i);
    let set = |bits: u64| {
        let members: Vec<&str> = (0..n).filter(|i| bits & (1 << i) != 0).map(name).collect();
        format!("{{{}}}", members.join(" "))
    };
    let mut out = Vec::new();

    for b in 0..n {
        let cc = cal.converse_of(cal.converse_of(b));
        if cc != b {
            out.push(Violation {
                kind: ViolationKind::ConverseInvolution,
                message: format!(
                    "converse not an involution: converse(converse({})) = {}",
                    name(b),
                    name(cc)
                ),
            });
        }
    }

    let id = cal.identity();
    if cal.converse_of(id) != id {
        out.push(Violation {
            kind: ViolationKind::IdentityLaw,
            message: format!(
                "identity not self-converse: converse({}) = {}",
                name(id),
                name(cal.converse_of(id))
            ),
        });
    }
    for b in 0..n {
        let want = 1u64 << b;
        for (left, right) in [(id, b), (b, id)] {
            let got = cal.composition_entry(left, right);
            if got != want {
                out.push(Violation {
                    kind: ViolationKind::IdentityLaw,
                    message: format!(
                        "identity law broken: compose({}, {}) = {}, expected {}",
                        name(left),
                        name(right),
                        set(got),
                        set(want)
                    ),
                });
            }
        }
    }

    for b1 in 0..n {
        for b2 in 0..n {
            let lhs = cal.converse_bits(cal.composition_entry(b1, b2));
            let rhs = cal.composition_entry(cal.converse_of(b2), cal.converse_of(b1));
            if lhs != rhs {
                out.push(Violation {
                    kind: ViolationKind::Duality,
                    message: format!(
                        "converse not matching duality: converse(compose({}, {})) = {} but compose(converse({}), converse({})) = {}",
                        name(b1),
                        name(b2),
                        set(lhs),
                        name(b2),
                        name(b1),
                        set(rhs)
                    ),
                });
            }
        }
    }

    out
}
