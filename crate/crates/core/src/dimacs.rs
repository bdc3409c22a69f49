//! DIMACS CNF reading and writing.
//!
//! Besides the `p cnf <n> <m>` header and 0-terminated clause lines, the
//! following comment lines are understood and written back verbatim:
//!
//! ```text
//! c family <name> <params>
//! c param k <k>
//! c mode <w1|w2>
//! c var <id> <name>
//! ```
//!
//! Emission order is fixed (family, free comments, param, mode, names,
//! header, clauses, one clause per line) so output is byte-reproducible.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Clause, CnfError, CnfFormula, Mode, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct DimacsError {
    pub line: usize,
    pub kind: DimacsErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsErrorKind {
    #[error("malformed header {0:?}")]
    MalformedHeader(String),
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("invalid literal {0:?}")]
    InvalidLiteral(String),
    #[error("literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("clause not terminated by 0")]
    Unterminated,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("malformed extension comment {0:?}")]
    MalformedComment(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

fn err(line: usize, kind: DimacsErrorKind) -> DimacsError {
    DimacsError { line, kind }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut formula: Option<CnfFormula> = None;
    let mut declared = 0usize;
    let mut pending_names: Vec<(usize, u32, String)> = Vec::new();
    let mut meta = crate::cnf::Metadata::default();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line == "c" || line.starts_with("c ") || line.starts_with("c\t") {
            let body = line[1..].trim_start();
            parse_comment(body, line_no, &mut meta, &mut pending_names)?;
            continue;
        }
        if line.starts_with('p') {
            if formula.is_some() {
                return Err(err(line_no, DimacsErrorKind::DuplicateHeader));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || err(line_no, DimacsErrorKind::MalformedHeader(line.to_string()));
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(bad());
            }
            let n: u32 = toks[2].parse().map_err(|_| bad())?;
            declared = toks[3].parse().map_err(|_| bad())?;
            formula = Some(CnfFormula::new(n));
            continue;
        }
        let f = formula.as_mut().ok_or_else(|| err(line_no, DimacsErrorKind::MissingHeader))?;
        let mut values = Vec::new();
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| err(line_no, DimacsErrorKind::InvalidLiteral(tok.to_string())))?;
            values.push(v);
        }
        match values.pop() {
            Some(0) => {}
            _ => return Err(err(line_no, DimacsErrorKind::Unterminated)),
        }
        if values.contains(&0) {
            return Err(err(line_no, DimacsErrorKind::Unterminated));
        }
        for &v in &values {
            if v.unsigned_abs() > u64::from(f.num_vars()) {
                return Err(err(
                    line_no,
                    DimacsErrorKind::LiteralOutOfRange { lit: v, num_vars: f.num_vars() },
                ));
            }
        }
        let clause = Clause::from_dimacs(&values).map_err(|e| err(line_no, e.into()))?;
        f.push(clause).map_err(|e| err(line_no, e.into()))?;
    }

    let mut f = formula.ok_or_else(|| err(last_line.max(1), DimacsErrorKind::MissingHeader))?;
    if f.len() != declared {
        return Err(err(
            last_line.max(1),
            DimacsErrorKind::ClauseCount { declared, found: f.len() },
        ));
    }
    for (line_no, id, name) in pending_names {
        let var = Var::new(id).map_err(|e| err(line_no, e.into()))?;
        f.set_name(var, name).map_err(|e| err(line_no, e.into()))?;
    }
    f.meta = meta;
    Ok(f)
}

fn parse_comment(
    body: &str,
    line_no: usize,
    meta: &mut crate::cnf::Metadata,
    names: &mut Vec<(usize, u32, String)>,
) -> Result<(), DimacsError> {
    let toks: Vec<&str> = body.split_whitespace().collect();
    let bad = || err(line_no, DimacsErrorKind::MalformedComment(body.to_string()));
    match toks.first().copied() {
        Some("var") => {
            if toks.len() != 3 {
                return Err(bad());
            }
            let id: u32 = toks[1].parse().map_err(|_| bad())?;
            names.push((line_no, id, toks[2].to_string()));
        }
        Some("param") => {
            if toks.len() != 3 || toks[1] != "k" || meta.param_k.is_some() {
                return Err(bad());
            }
            meta.param_k = Some(toks[2].parse().map_err(|_| bad())?);
        }
        Some("mode") => {
            if toks.len() != 2 || meta.mode.is_some() {
                return Err(bad());
            }
            meta.mode = Some(Mode::parse(toks[1]).ok_or_else(bad)?);
        }
        Some("family") => {
            if toks.len() < 2 || meta.family.is_some() {
                return Err(bad());
            }
            meta.family = Some(toks[1..].join(" "));
        }
        _ => meta.comments.push(body.to_string()),
    }
    Ok(())
}

pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    let meta = &formula.meta;
    if let Some(family) = &meta.family {
        let _ = writeln!(out, "c family {family}");
    }
    for c in &meta.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {c}");
        }
    }
    if let Some(k) = meta.param_k {
        let _ = writeln!(out, "c param k {k}");
    }
    if let Some(mode) = meta.mode {
        let _ = writeln!(out, "c mode {mode}");
    }
    for (var, name) in formula.names() {
        let _ = writeln!(out, "c var {} {}", var.id(), name);
    }
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.len());
    for clause in formula.clauses() {
        for lit in clause.lits() {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
