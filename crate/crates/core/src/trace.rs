//! Line-oriented proof trace format.
//!
//! ```text
//! c <comment>
//! p proof <nsteps> [<plain|w1|w2> <k>]
//! <id> I <clauseIndex>
//! <id> A <lit>… 0
//! <id> R <idA> <idB> <pivotVar> <lit>… 0
//! <id> W <idPremise> <addedLit> <lit>… 0
//! t <lit>… 0
//! ```
//!
//! Clause indices are 1-based. `t` lines turn the trace into a derivation of
//! the listed clauses; without them it is a refutation. Plain traces are
//! written with the short header.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Clause, Lit, Mode, Var};
use crate::proof::{Proof, Rule, Step, StepId, System, Target};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct TraceError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError { line, msg: msg.into() }
}

struct Tokens<'a> {
    line: usize,
    toks: std::slice::Iter<'a, &'a str>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, TraceError> {
        self.toks.next().copied().ok_or_else(|| err(self.line, format!("missing {what}")))
    }

    fn int<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, TraceError> {
        let tok = self.next(what)?;
        tok.parse().map_err(|_| err(self.line, format!("invalid {what} {tok:?}")))
    }

    fn lit(&mut self) -> Result<Lit, TraceError> {
        let v: i64 = self.int("literal")?;
        Lit::from_dimacs(v).map_err(|e| err(self.line, e.to_string()))
    }

    /// Literals up to and including the terminating 0.
    fn clause(&mut self) -> Result<Clause, TraceError> {
        let mut lits = Vec::new();
        loop {
            let v: i64 = self.int("literal")?;
            if v == 0 {
                break;
            }
            lits.push(Lit::from_dimacs(v).map_err(|e| err(self.line, e.to_string()))?);
        }
        if let Some(extra) = self.toks.next() {
            return Err(err(self.line, format!("unexpected token {extra:?} after 0")));
        }
        let clause = Clause::new(lits.iter().copied());
        if clause.lits() != lits.as_slice() {
            return Err(err(self.line, "literals not in canonical order"));
        }
        Ok(clause)
    }

    fn end(&mut self) -> Result<(), TraceError> {
        match self.toks.next() {
            None => Ok(()),
            Some(t) => Err(err(self.line, format!("unexpected token {t:?}"))),
        }
    }
}

pub fn parse_proof(text: &str) -> Result<Proof, TraceError> {
    let mut header: Option<(usize, System)> = None;
    let mut steps = Vec::new();
    let mut targets = Vec::new();
    let mut comments = Vec::new();
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "c" || line.starts_with("c ") {
            comments.push(line[1..].trim_start().to_string());
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let mut t = Tokens { line: line_no, toks: toks.iter() };
        if toks[0] == "p" {
            if header.is_some() {
                return Err(err(line_no, "duplicate header"));
            }
            t.next("p")?;
            if t.next("format")? != "proof" {
                return Err(err(line_no, "expected `p proof`"));
            }
            let nsteps: usize = t.int("step count")?;
            let system = match toks.len() {
                3 => System::Plain,
                5 => {
                    let mode = t.next("mode")?;
                    let k: u32 = t.int("k")?;
                    match mode {
                        "plain" => System::Plain,
                        other => System::Param {
                            mode: Mode::parse(other)
                                .ok_or_else(|| err(line_no, format!("unknown mode {other:?}")))?,
                            k,
                        },
                    }
                }
                _ => return Err(err(line_no, "malformed header")),
            };
            header = Some((nsteps, system));
            continue;
        }
        if header.is_none() {
            return Err(err(line_no, "missing `p proof` header"));
        }
        if toks[0] == "t" {
            t.next("t")?;
            targets.push(t.clause()?);
            continue;
        }
        if !targets.is_empty() {
            return Err(err(line_no, "step after target lines"));
        }
        let id: StepId = t.int("step id")?;
        let rule = match t.next("rule")? {
            "I" => {
                let index: usize = t.int("clause index")?;
                if index == 0 {
                    return Err(err(line_no, "clause indices start at 1"));
                }
                t.end()?;
                Rule::Input(index - 1)
            }
            "A" => Rule::Axiom(t.clause()?),
            "R" => {
                let a = t.int("premise")?;
                let b = t.int("premise")?;
                let pivot: u32 = t.int("pivot")?;
                let pivot = Var::new(pivot).map_err(|e| err(line_no, e.to_string()))?;
                Rule::Resolve { a, b, pivot, derived: t.clause()? }
            }
            "W" => {
                let premise = t.int("premise")?;
                let added = t.lit()?;
                Rule::Weaken { premise, added, derived: t.clause()? }
            }
            other => return Err(err(line_no, format!("unknown rule {other:?}"))),
        };
        steps.push(Step { id, rule });
    }
    let (nsteps, system) = header.ok_or_else(|| err(last.max(1), "missing `p proof` header"))?;
    if nsteps != steps.len() {
        return Err(err(
            last.max(1),
            format!("header declares {nsteps} steps, found {}", steps.len()),
        ));
    }
    let target = if targets.is_empty() { Target::Refutation } else { Target::Derivation(targets) };
    Ok(Proof { system, steps, target, comments })
}

fn write_clause(out: &mut String, c: &Clause) {
    for l in c.lits() {
        let _ = write!(out, " {}", l.to_dimacs());
    }
    out.push_str(" 0\n");
}

pub fn emit_proof(proof: &Proof) -> String {
    let mut out = String::new();
    for c in &proof.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {c}");
        }
    }
    match proof.system {
        System::Plain => {
            let _ = writeln!(out, "p proof {}", proof.steps.len());
        }
        System::Param { mode, k } => {
            let _ = writeln!(out, "p proof {} {} {}", proof.steps.len(), mode, k);
        }
    }
    for step in &proof.steps {
        let _ = write!(out, "{}", step.id);
        match &step.rule {
            Rule::Input(i) => {
                let _ = writeln!(out, " I {}", i + 1);
            }
            Rule::Axiom(c) => {
                out.push_str(" A");
                write_clause(&mut out, c);
            }
            Rule::Resolve { a, b, pivot, derived } => {
                let _ = write!(out, " R {a} {b} {}", pivot.id());
                write_clause(&mut out, derived);
            }
            Rule::Weaken { premise, added, derived } => {
                let _ = write!(out, " W {premise} {}", added.to_dimacs());
                write_clause(&mut out, derived);
            }
        }
    }
    if let Target::Derivation(ts) = &proof.target {
        for t in ts {
            out.push('t');
            write_clause(&mut out, t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_three_step() {
        let text = "p proof 3\n1 I 1\n2 I 2\n3 R 1 2 1 0\n";
        let p = parse_proof(text).unwrap();
        assert_eq!(p.system, System::Plain);
        assert_eq!(p.steps.len(), 3);
        assert_eq!(p.steps[0].rule, Rule::Input(0));
        assert_eq!(p.target, Target::Refutation);
        assert_eq!(emit_proof(&p), text);
    }

    #[test]
    fn axiom_line() {
        let p = parse_proof("p proof 1 w2 1\n4 A -1 -3 0\n").unwrap();
        assert_eq!(p.steps[0].rule, Rule::Axiom(Clause::from_dimacs(&[-1, -3]).unwrap()));
        assert_eq!(p.system, System::Param { mode: Mode::W2, k: 1 });
    }

    #[test]
    fn long_plain_header_is_accepted() {
        let p = parse_proof("p proof 1 plain 0\n1 I 1\n").unwrap();
        assert_eq!(p.system, System::Plain);
    }

    #[test]
    fn derivation_round_trip() {
        let text = "c note\np proof 3\n1 I 1\n2 I 2\n3 R 1 2 2 1 3 0\n3 W 3 -4 1 3 -4 0\n";
        // Duplicate step count is a header error.
        assert!(parse_proof(text).is_err());
        let text = "c note\np proof 4\n1 I 1\n2 I 2\n3 R 1 2 2 1 3 0\n4 W 3 -4 1 3 -4 0\nt 1 3 -4 0\n";
        let p = parse_proof(text).unwrap();
        assert_eq!(emit_proof(&p), text);
    }

    #[test]
    fn syntax_errors_have_line_numbers() {
        assert_eq!(parse_proof("1 I 1\n").unwrap_err().line, 1);
        assert_eq!(parse_proof("p proof 1\n1 X 1\n").unwrap_err().line, 2);
        assert_eq!(parse_proof("p proof 1\n\n1 R 1 2 1\n").unwrap_err().line, 3);
        assert_eq!(parse_proof("p proof 1\n1 A 3 -1 0\n").unwrap_err().line, 2);
        assert_eq!(parse_proof("p proof 1\n1 I 0\n").unwrap_err().line, 2);
        assert_eq!(parse_proof("p proof 2 w3 1\n").unwrap_err().line, 1);
    }

    fn arb_clause() -> impl Strategy<Value = Clause> {
        prop::collection::vec((1i64..=9, any::<bool>()), 0..5).prop_map(|v| {
            Clause::from_dimacs(&v.into_iter().map(|(x, s)| if s { x } else { -x }).collect::<Vec<_>>())
                .unwrap()
        })
    }

    fn arb_rule() -> impl Strategy<Value = Rule> {
        prop_oneof![
            (0usize..20).prop_map(Rule::Input),
            arb_clause().prop_map(Rule::Axiom),
            (1u32..50, 1u32..50, 1u32..9, arb_clause()).prop_map(|(a, b, p, derived)| Rule::Resolve {
                a,
                b,
                pivot: Var::from_index(p),
                derived
            }),
            (1u32..50, (1i64..9, any::<bool>()), arb_clause()).prop_map(|(premise, (v, s), derived)| {
                Rule::Weaken {
                    premise,
                    added: Lit::from_dimacs(if s { v } else { -v }).unwrap(),
                    derived,
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn emit_parse_identity(rules in prop::collection::vec(arb_rule(), 0..12),
                               targets in prop::collection::vec(arb_clause(), 0..3),
                               param in prop::option::of((any::<bool>(), 0u32..5))) {
            let steps = rules.into_iter().enumerate()
                .map(|(i, rule)| Step { id: i as StepId + 1, rule }).collect();
            let system = match param {
                None => System::Plain,
                Some((w1, k)) => System::Param { mode: if w1 { Mode::W1 } else { Mode::W2 }, k },
            };
            let target = if targets.is_empty() { Target::Refutation } else { Target::Derivation(targets) };
            let p = Proof { system, steps, target, comments: vec!["x".into()] };
            let text = emit_proof(&p);
            let q = parse_proof(&text).unwrap();
            prop_assert_eq!(&p, &q);
            prop_assert_eq!(emit_proof(&q), text);
        }
    }
}
