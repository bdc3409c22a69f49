//! Resolution proofs as step DAGs, the checker for plain and parameterized
//! Resolution, and restriction of proofs by partial assignments.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::axioms::AxiomOracle;
use crate::cnf::{Assignment, Clause, CnfFormula, Eval, Lit, Mode, Var};

pub type StepId = u32;

/// How a step's clause is obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Clause of the input formula, by 0-based index (1-based on the wire).
    Input(usize),
    /// Augmentation axiom, validated against the oracle.
    Axiom(Clause),
    /// `a` holds `pivot` positively, `b` negatively.
    Resolve { a: StepId, b: StepId, pivot: Var, derived: Clause },
    Weaken { premise: StepId, added: Lit, derived: Clause },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub id: StepId,
    pub rule: Rule,
}

impl Step {
    /// The clause written on this step; `None` for inputs, whose clause lives
    /// in the formula.
    pub fn written_clause(&self) -> Option<&Clause> {
        match &self.rule {
            Rule::Input(_) => None,
            Rule::Axiom(c) => Some(c),
            Rule::Resolve { derived, .. } | Rule::Weaken { derived, .. } => Some(derived),
        }
    }

    pub fn premises(&self) -> impl Iterator<Item = StepId> {
        let (a, b) = match self.rule {
            Rule::Resolve { a, b, .. } => (Some(a), Some(b)),
            Rule::Weaken { premise, .. } => (Some(premise), None),
            _ => (None, None),
        };
        a.into_iter().chain(b)
    }
}

/// Proof system a trace is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Plain,
    Param { mode: Mode, k: u32 },
}

impl System {
    pub fn oracle(self, num_vars: u32) -> Option<AxiomOracle> {
        match self {
            System::Plain => None,
            System::Param { mode, k } => Some(AxiomOracle::new(num_vars, k, mode)),
        }
    }

    pub fn of_oracle(oracle: Option<&AxiomOracle>) -> System {
        match oracle {
            None => System::Plain,
            Some(o) => System::Param { mode: o.mode, k: o.k },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// The last step derives the empty clause.
    Refutation,
    /// Each listed clause is derived by some step (multiset).
    Derivation(Vec<Clause>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub system: System,
    pub steps: Vec<Step>,
    pub target: Target,
    pub comments: Vec<String>,
}

impl Proof {
    pub fn new(system: System, steps: Vec<Step>, target: Target) -> Proof {
        Proof { system, steps, target, comments: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn index_of(&self, id: StepId) -> Option<usize> {
        self.steps.binary_search_by_key(&id, |s| s.id).ok()
    }
}

/// Why a proof was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    BadPremiseReference,
    PivotAbsent,
    DerivedClauseMismatch,
    AxiomRejected,
    TargetNotDerived,
    InvalidStepId,
    VariableOutOfRange,
    SystemMismatch,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::BadPremiseReference => "bad-premise-reference",
            Reason::PivotAbsent => "pivot-absent",
            Reason::DerivedClauseMismatch => "derived-clause-mismatch",
            Reason::AxiomRejected => "axiom-rejected",
            Reason::TargetNotDerived => "target-not-derived",
            Reason::InvalidStepId => "invalid-step-id",
            Reason::VariableOutOfRange => "variable-out-of-range",
            Reason::SystemMismatch => "system-mismatch",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Step id 0 denotes a proof-level failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("step={step} reason={reason}")]
pub struct CheckError {
    pub step: StepId,
    pub reason: Reason,
}

fn fail(step: StepId, reason: Reason) -> CheckError {
    CheckError { step, reason }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckReport {
    /// Steps reachable from the sink(s).
    pub size: usize,
    /// Trace length including unreachable steps.
    pub total_steps: usize,
}

/// Validates every step of `proof` against `formula` and, for parameterized
/// systems, `oracle`. Returns the size counted over sink-reachable steps.
pub fn check(
    proof: &Proof,
    formula: &CnfFormula,
    oracle: Option<&AxiomOracle>,
) -> Result<CheckReport, CheckError> {
    check_clauses(proof, formula, oracle).map(|(report, _)| report)
}

/// Like [`check`], also returning the clause of every step.
pub fn check_clauses(
    proof: &Proof,
    formula: &CnfFormula,
    oracle: Option<&AxiomOracle>,
) -> Result<(CheckReport, Vec<Clause>), CheckError> {
    if System::of_oracle(oracle) != proof.system
        || oracle.is_some_and(|o| o.n != formula.num_vars())
    {
        return Err(fail(0, Reason::SystemMismatch));
    }
    let n = formula.num_vars();
    let mut clauses: Vec<Clause> = Vec::with_capacity(proof.steps.len());
    let mut prev: StepId = 0;
    for step in &proof.steps {
        let id = step.id;
        if id <= prev {
            return Err(fail(id, Reason::InvalidStepId));
        }
        prev = id;
        if let Some(c) = step.written_clause() {
            if c.max_var().is_some_and(|v| v.id() > n) {
                return Err(fail(id, Reason::VariableOutOfRange));
            }
        }
        let premise = |p: StepId| -> Result<&Clause, CheckError> {
            if p >= id {
                return Err(fail(id, Reason::BadPremiseReference));
            }
            // Only the already-validated prefix is sorted.
            let done = &proof.steps[..clauses.len()];
            done.binary_search_by_key(&p, |s| s.id)
                .map(|i| &clauses[i])
                .map_err(|_| fail(id, Reason::BadPremiseReference))
        };
        let clause = match &step.rule {
            Rule::Input(idx) => formula
                .clause(*idx)
                .cloned()
                .ok_or(fail(id, Reason::BadPremiseReference))?,
            Rule::Axiom(c) => {
                if !oracle.is_some_and(|o| o.is_axiom(c)) {
                    return Err(fail(id, Reason::AxiomRejected));
                }
                c.clone()
            }
            Rule::Resolve { a, b, pivot, derived } => {
                let (ca, cb) = (premise(*a)?, premise(*b)?);
                if pivot.id() > n {
                    return Err(fail(id, Reason::VariableOutOfRange));
                }
                if !ca.contains(pivot.pos()) || !cb.contains(pivot.neg()) {
                    return Err(fail(id, Reason::PivotAbsent));
                }
                if ca.resolve(cb, *pivot) != *derived {
                    return Err(fail(id, Reason::DerivedClauseMismatch));
                }
                derived.clone()
            }
            Rule::Weaken { premise: p, added, derived } => {
                let cp = premise(*p)?;
                if added.var().id() > n {
                    return Err(fail(id, Reason::VariableOutOfRange));
                }
                if cp.with(*added) != *derived {
                    return Err(fail(id, Reason::DerivedClauseMismatch));
                }
                derived.clone()
            }
        };
        clauses.push(clause);
    }

    let sinks = sinks(proof, &clauses)?;
    let size = reachable(&proof.steps, &sinks, |id| proof.index_of(id)).iter().filter(|&&r| r).count();
    Ok((CheckReport { size, total_steps: proof.steps.len() }, clauses))
}

fn sinks(proof: &Proof, clauses: &[Clause]) -> Result<Vec<usize>, CheckError> {
    match &proof.target {
        Target::Refutation => match clauses.last() {
            Some(c) if c.is_empty() => Ok(vec![clauses.len() - 1]),
            _ => Err(fail(proof.steps.last().map_or(0, |s| s.id), Reason::TargetNotDerived)),
        },
        Target::Derivation(targets) => {
            let mut first: HashMap<&Clause, usize> = HashMap::new();
            for (i, c) in clauses.iter().enumerate() {
                first.entry(c).or_insert(i);
            }
            targets
                .iter()
                .map(|t| first.get(t).copied().ok_or(fail(0, Reason::TargetNotDerived)))
                .collect()
        }
    }
}

fn reachable(steps: &[Step], sinks: &[usize], index_of: impl Fn(StepId) -> Option<usize>) -> Vec<bool> {
    let mut seen = vec![false; steps.len()];
    let mut stack: Vec<usize> = sinks.to_vec();
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        stack.extend(steps[i].premises().filter_map(&index_of));
    }
    seen
}

/// Accumulates steps with their clauses and emits a compact proof.
///
/// Steps are addressed by builder index; `finish` drops everything not
/// reachable from the sinks and renumbers ids from 1.
#[derive(Debug, Default, Clone)]
pub struct ProofBuilder {
    rules: Vec<Rule>,
    clauses: Vec<Clause>,
}

/// Builder-local step handle.
pub type Handle = usize;

impl ProofBuilder {
    pub fn new() -> ProofBuilder {
        ProofBuilder::default()
    }

    pub fn clause(&self, h: Handle) -> &Clause {
        &self.clauses[h]
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn add(&mut self, rule: Rule, clause: Clause) -> Handle {
        self.rules.push(rule);
        self.clauses.push(clause);
        self.rules.len() - 1
    }

    pub fn input(&mut self, index: usize, clause: Clause) -> Handle {
        self.add(Rule::Input(index), clause)
    }

    pub fn axiom(&mut self, clause: Clause) -> Handle {
        self.add(Rule::Axiom(clause.clone()), clause)
    }

    /// `a` must contain `pivot`, `b` must contain `¬pivot`.
    pub fn resolve(&mut self, a: Handle, b: Handle, pivot: Var) -> Handle {
        debug_assert!(self.clauses[a].contains(pivot.pos()));
        debug_assert!(self.clauses[b].contains(pivot.neg()));
        let derived = self.clauses[a].resolve(&self.clauses[b], pivot);
        // Handles stand in for ids until `finish`.
        self.add(
            Rule::Resolve { a: a as StepId, b: b as StepId, pivot, derived: derived.clone() },
            derived,
        )
    }

    pub fn weaken(&mut self, premise: Handle, added: Lit) -> Handle {
        let derived = self.clauses[premise].with(added);
        self.add(Rule::Weaken { premise: premise as StepId, added, derived: derived.clone() }, derived)
    }

    pub fn finish(self, system: System, sinks: &[Handle], target: Target) -> Proof {
        let placeholder: Vec<Step> = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| Step { id: i as StepId, rule: r.clone() })
            .collect();
        let keep = reachable(&placeholder, sinks, |h| Some(h as usize));
        let mut new_id = vec![0 as StepId; placeholder.len()];
        let mut steps = Vec::new();
        for (h, step) in placeholder.into_iter().enumerate() {
            if !keep[h] {
                continue;
            }
            let id = steps.len() as StepId + 1;
            new_id[h] = id;
            let rule = match step.rule {
                Rule::Resolve { a, b, pivot, derived } => Rule::Resolve {
                    a: new_id[a as usize],
                    b: new_id[b as usize],
                    pivot,
                    derived,
                },
                Rule::Weaken { premise, added, derived } => {
                    Rule::Weaken { premise: new_id[premise as usize], added, derived }
                }
                other => other,
            };
            steps.push(Step { id, rule });
        }
        let proof = Proof::new(system, steps, target);
        if let Target::Refutation = proof.target {
            // A refutation's sink must be the last kept step.
            debug_assert!(sinks.iter().all(|&s| new_id[s] as usize == proof.steps.len()));
        }
        proof
    }
}

/// A formula restricted by a partial assignment.
#[derive(Debug, Clone)]
pub struct RestrictedFormula {
    pub formula: CnfFormula,
    /// Original clause index → restricted index (`None` if satisfied).
    pub index_map: Vec<Option<usize>>,
}

/// Deletes satisfied clauses and false literals. Variable numbering and the
/// name table are kept.
pub fn restrict_formula(formula: &CnfFormula, alpha: &Assignment) -> RestrictedFormula {
    let mut out = CnfFormula::new(formula.num_vars());
    for (v, name) in formula.names() {
        out.set_name(*v, name.clone()).expect("copied names are unique");
    }
    out.meta.comments = formula.meta.comments.clone();
    let mut index_map = Vec::with_capacity(formula.len());
    for c in formula.clauses() {
        if c.evaluate(alpha) == Eval::Satisfied {
            index_map.push(None);
        } else {
            index_map.push(Some(out.len()));
            out.push(restrict_clause(c, alpha)).expect("subset of a valid clause");
        }
    }
    RestrictedFormula { formula: out, index_map }
}

/// Drops literals assigned by `alpha`. Only meaningful when `c` is not
/// satisfied.
pub fn restrict_clause(c: &Clause, alpha: &Assignment) -> Clause {
    c.lits().iter().copied().filter(|l| !alpha.is_assigned(l.var())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictError {
    #[error("input proof is invalid: {0}")]
    Invalid(#[from] CheckError),
    #[error("restriction satisfies the proof target")]
    Trivializes,
    #[error("step {0}: axiom is only partially assigned by the restriction")]
    AxiomTouched(StepId),
}

#[derive(Debug, Clone)]
pub struct RestrictedProof {
    pub formula: CnfFormula,
    pub proof: Proof,
}

/// Restricts a checked proof by `alpha`.
///
/// Each step maps either to a satisfied marker or to a step whose clause is a
/// subset of the restricted original clause. A resolution whose pivot is
/// assigned collapses onto the premise not satisfied by the pivot; one whose
/// premise lost the pivot collapses onto that premise. No step is ever added
/// beyond one per original step, so the size cannot grow.
pub fn restrict_proof(
    proof: &Proof,
    alpha: &Assignment,
    formula: &CnfFormula,
) -> Result<RestrictedProof, RestrictError> {
    let oracle = proof.system.oracle(formula.num_vars());
    let (_, clauses) = check_clauses(proof, formula, oracle.as_ref())?;
    let restricted = restrict_formula(formula, alpha);

    let mut b = ProofBuilder::new();
    let mut image: Vec<Option<Handle>> = Vec::with_capacity(proof.steps.len());
    let at = |id: StepId| proof.index_of(id).expect("checked premise");
    for (i, step) in proof.steps.iter().enumerate() {
        let mapped = match &step.rule {
            Rule::Input(idx) => restricted.index_map[*idx]
                .map(|j| b.input(j, restricted.formula.clauses()[j].clone())),
            Rule::Axiom(c) => {
                if c.evaluate(alpha) == Eval::Satisfied {
                    None
                } else if c.vars().any(|v| alpha.is_assigned(v)) {
                    return Err(RestrictError::AxiomTouched(step.id));
                } else {
                    Some(b.axiom(c.clone()))
                }
            }
            Rule::Resolve { a, b: nb, pivot, .. } => {
                let (ra, rb) = (image[at(*a)], image[at(*nb)]);
                match alpha.get(*pivot) {
                    Some(true) => rb,
                    Some(false) => ra,
                    None => match (ra, rb) {
                        (Some(ha), Some(hb)) => {
                            let has_a = b.clause(ha).contains(pivot.pos());
                            let has_b = b.clause(hb).contains(pivot.neg());
                            match (has_a, has_b) {
                                (true, true) => Some(b.resolve(ha, hb, *pivot)),
                                (false, _) => Some(ha),
                                (true, false) => Some(hb),
                            }
                        }
                        _ => None,
                    },
                }
            }
            Rule::Weaken { premise, added, .. } => match image[at(*premise)] {
                None => None,
                Some(h) => {
                    if alpha.is_assigned(added.var()) || b.clause(h).contains(*added) {
                        Some(h)
                    } else {
                        Some(b.weaken(h, *added))
                    }
                }
            },
        };
        debug_assert!(mapped.is_none_or(|h| b
            .clause(h)
            .lits()
            .iter()
            .all(|l| clauses[i].contains(*l) && !alpha.is_assigned(l.var()))));
        image.push(mapped);
    }

    let (sinks, target) = match &proof.target {
        Target::Refutation => {
            let sink = image.last().copied().flatten().ok_or(RestrictError::Trivializes)?;
            (vec![sink], Target::Refutation)
        }
        Target::Derivation(targets) => {
            let mut first: HashMap<&Clause, usize> = HashMap::new();
            for (i, c) in clauses.iter().enumerate() {
                first.entry(c).or_insert(i);
            }
            let mut sinks = Vec::new();
            let mut out = Vec::new();
            for t in targets {
                let h = image[first[t]].ok_or(RestrictError::Trivializes)?;
                sinks.push(h);
                out.push(b.clause(h).clone());
            }
            (sinks, Target::Derivation(out))
        }
    };
    let mut new_proof = b.finish(proof.system, &sinks, target);
    new_proof.comments = proof.comments.clone();
    Ok(RestrictedProof { formula: restricted.formula, proof: new_proof })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl(v: &[i64]) -> Clause {
        Clause::from_dimacs(v).unwrap()
    }

    fn x(i: u32) -> Var {
        Var::from_index(i)
    }

    fn three_step() -> (CnfFormula, Proof) {
        let f = CnfFormula::with_clauses(1, vec![cl(&[1]), cl(&[-1])]).unwrap();
        let p = Proof::new(
            System::Plain,
            vec![
                Step { id: 1, rule: Rule::Input(0) },
                Step { id: 2, rule: Rule::Input(1) },
                Step { id: 3, rule: Rule::Resolve { a: 1, b: 2, pivot: x(1), derived: cl(&[]) } },
            ],
            Target::Refutation,
        );
        (f, p)
    }

    #[test]
    fn accepts_three_step_refutation() {
        let (f, p) = three_step();
        assert_eq!(check(&p, &f, None).unwrap(), CheckReport { size: 3, total_steps: 3 });
    }

    #[test]
    fn resolution_rule() {
        let f = CnfFormula::with_clauses(3, vec![cl(&[1, 2]), cl(&[-2, 3])]).unwrap();
        let p = Proof::new(
            System::Plain,
            vec![
                Step { id: 1, rule: Rule::Input(0) },
                Step { id: 2, rule: Rule::Input(1) },
                Step { id: 3, rule: Rule::Resolve { a: 1, b: 2, pivot: x(2), derived: cl(&[1, 3]) } },
            ],
            Target::Derivation(vec![cl(&[1, 3])]),
        );
        assert_eq!(check(&p, &f, None).unwrap().size, 3);
    }

    #[test]
    fn rejects_mixed_axiom() {
        let f = CnfFormula::with_clauses(2, vec![]).unwrap();
        let p = Proof::new(
            System::Param { mode: Mode::W2, k: 1 },
            vec![Step { id: 1, rule: Rule::Axiom(cl(&[-1, 2])) }],
            Target::Derivation(vec![cl(&[-1, 2])]),
        );
        let o = AxiomOracle::new(2, 1, Mode::W2);
        assert_eq!(check(&p, &f, Some(&o)), Err(fail(1, Reason::AxiomRejected)));
    }

    #[test]
    fn error_reasons() {
        let (f, p) = three_step();
        let mut q = p.clone();
        q.steps[2].rule = Rule::Resolve { a: 1, b: 2, pivot: x(1), derived: cl(&[1]) };
        assert_eq!(check(&q, &f, None), Err(fail(3, Reason::DerivedClauseMismatch)));
        let mut q = p.clone();
        q.steps[2].rule = Rule::Resolve { a: 2, b: 1, pivot: x(1), derived: cl(&[]) };
        assert_eq!(check(&q, &f, None), Err(fail(3, Reason::PivotAbsent)));
        let mut q = p.clone();
        q.steps[2].rule = Rule::Resolve { a: 1, b: 3, pivot: x(1), derived: cl(&[]) };
        assert_eq!(check(&q, &f, None), Err(fail(3, Reason::BadPremiseReference)));
        let mut q = p.clone();
        q.steps[1].rule = Rule::Input(7);
        assert_eq!(check(&q, &f, None), Err(fail(2, Reason::BadPremiseReference)));
        let mut q = p.clone();
        q.steps.pop();
        assert_eq!(check(&q, &f, None), Err(fail(2, Reason::TargetNotDerived)));
        let mut q = p.clone();
        q.steps[1].id = 1;
        assert_eq!(check(&q, &f, None), Err(fail(1, Reason::InvalidStepId)));
        let o = AxiomOracle::new(1, 0, Mode::W2);
        assert_eq!(check(&p, &f, Some(&o)), Err(fail(0, Reason::SystemMismatch)));
    }

    #[test]
    fn size_excludes_unreachable() {
        let f = CnfFormula::with_clauses(2, vec![cl(&[1]), cl(&[-1]), cl(&[2])]).unwrap();
        let p = Proof::new(
            System::Plain,
            vec![
                Step { id: 1, rule: Rule::Input(2) },
                Step { id: 2, rule: Rule::Input(0) },
                Step { id: 3, rule: Rule::Input(1) },
                Step { id: 4, rule: Rule::Resolve { a: 2, b: 3, pivot: x(1), derived: cl(&[]) } },
            ],
            Target::Refutation,
        );
        assert_eq!(check(&p, &f, None).unwrap(), CheckReport { size: 3, total_steps: 4 });
    }

    #[test]
    fn weakening_into_tautology_is_legal() {
        let f = CnfFormula::with_clauses(1, vec![cl(&[1])]).unwrap();
        let p = Proof::new(
            System::Plain,
            vec![
                Step { id: 1, rule: Rule::Input(0) },
                Step { id: 2, rule: Rule::Weaken { premise: 1, added: x(1).neg(), derived: cl(&[1, -1]) } },
            ],
            Target::Derivation(vec![cl(&[1, -1])]),
        );
        assert!(check(&p, &f, None).is_ok());
    }

    #[test]
    fn restrict_chain() {
        // {x1, ¬x1 ∨ x2, ¬x2}
        let f = CnfFormula::with_clauses(2, vec![cl(&[1]), cl(&[-1, 2]), cl(&[-2])]).unwrap();
        let mut b = ProofBuilder::new();
        let s1 = b.input(0, cl(&[1]));
        let s2 = b.input(1, cl(&[-1, 2]));
        let s3 = b.resolve(s1, s2, x(1));
        let s4 = b.input(2, cl(&[-2]));
        let s5 = b.resolve(s3, s4, x(2));
        let p = b.finish(System::Plain, &[s5], Target::Refutation);
        assert_eq!(check(&p, &f, None).unwrap().size, 5);

        let alpha: Assignment = [(x(1), true)].into_iter().collect();
        let r = restrict_proof(&p, &alpha, &f).unwrap();
        assert_eq!(r.formula.clauses(), &[cl(&[2]), cl(&[-2])]);
        let report = check(&r.proof, &r.formula, None).unwrap();
        assert_eq!(report.size, 3);

        let r = restrict_proof(&p, &Assignment::new(), &f).unwrap();
        assert_eq!(r.proof, p);
    }

    #[test]
    fn restrict_trivializing_derivation() {
        let f = CnfFormula::with_clauses(1, vec![cl(&[1])]).unwrap();
        let p = Proof::new(
            System::Plain,
            vec![Step { id: 1, rule: Rule::Input(0) }],
            Target::Derivation(vec![cl(&[1])]),
        );
        let alpha: Assignment = [(x(1), true)].into_iter().collect();
        assert!(matches!(restrict_proof(&p, &alpha, &f), Err(RestrictError::Trivializes)));
    }
}
