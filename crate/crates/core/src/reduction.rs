//! Reduction from the embedded `Ψ'_{n,k}` to the guarded pigeonhole formula
//! `P_{n,k}`.
//!
//! The substitution sends `x_i ↦ ¬c2`, `r_{x_i,j} ↦ p_{i,j}` and
//! `s_{x_i,j} ↦ q_{i,j}`. Every substituted `Ψ'` clause is either a clause of
//! `P_{n,k}` or one resolution on `c1` away from one, so a refutation of
//! `Ψ'` can be pushed through the substitution and spliced onto the
//! derivation to refute `P_{n,k}`.
//!
//! For odd `n` the `Ψ` part pairs `v_1…v_{n-1}` and leaves `v_n` alone.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit, Var};
use crate::families::{self, EmbedLayout, FamilyError, PnkLayout};
use crate::proof::{Handle, Proof, ProofBuilder, Rule, StepId, System, Target};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("variable {0} is not mapped by the substitution")]
    Unmapped(Var),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("derived targets differ from the substituted formula at target {0}")]
    TargetMismatch(usize),
    #[error("step {step}: {msg}")]
    Compose { step: StepId, msg: String },
}

/// Variable-to-literal map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Lit>,
}

impl Substitution {
    pub fn new(map: BTreeMap<Var, Lit>) -> Substitution {
        Substitution { map }
    }

    /// `σ` from `Ψ'_{n,k}` to `P_{n,k}`.
    pub fn psi_to_pnk(n: usize, k: usize) -> Substitution {
        let (e, p) = (EmbedLayout { n, k }, PnkLayout { n, k });
        let mut map = BTreeMap::new();
        for i in 1..=n {
            map.insert(e.x(i), p.c2().neg());
            for j in 1..=k {
                map.insert(e.r(i, j), p.p(i, j).pos());
            }
            for j in 1..=n - k {
                map.insert(e.s(i, j), p.q(i, j).pos());
            }
        }
        Substitution { map }
    }

    pub fn var(&self, v: Var) -> Option<Lit> {
        self.map.get(&v).copied()
    }

    pub fn lit(&self, l: Lit) -> Option<Lit> {
        self.var(l.var()).map(|m| if l.is_positive() { m } else { !m })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Lit)> + '_ {
        self.map.iter().map(|(v, l)| (*v, *l))
    }
}

/// Maps every literal through `σ`; duplicates merge, tautologies stay.
pub fn substitute(clause: &Clause, sigma: &Substitution) -> Result<Clause, ReductionError> {
    clause.lits().iter().map(|&l| sigma.lit(l).ok_or(ReductionError::Unmapped(l.var()))).collect()
}

/// `Ψ'_{n,k}`, with the unpaired last variable for odd `n`.
pub fn psi_prime(n: usize, k: usize) -> Result<CnfFormula, ReductionError> {
    if n.is_multiple_of(2) {
        return Ok(families::psi_embedded(n, k)?);
    }
    if k == 0 || k > n {
        return Err(FamilyError(format!("psi-embedded requires 1 <= k <= n, got n={n} k={k}")).into());
    }
    Ok(families::embed_w1(&families::psi_blocks(n), k)?)
}

/// A derivation of `σ(Ψ'_{n,k})` from `P_{n,k}`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub proof: Proof,
    pub sigma: Substitution,
    pub psi_prime: CnfFormula,
    pub pnk: CnfFormula,
    /// Resolutions each target needs on its own (before sharing).
    pub per_target_steps: Vec<usize>,
}

pub fn derive_reduction(n: usize, k: usize) -> Result<Reduction, ReductionError> {
    let pnk = families::pnk(n, k)?;
    let psi_prime = psi_prime(n, k)?;
    let sigma = Substitution::psi_to_pnk(n, k);
    let lay = PnkLayout { n, k };
    let c1 = lay.c1();

    let index: HashMap<&Clause, usize> =
        pnk.clauses().iter().enumerate().rev().map(|(i, c)| (c, i)).collect();
    let or_c1 = Clause::new([c1.pos(), lay.c2().pos()]);
    let mut b = ProofBuilder::new();
    let mut inputs: HashMap<usize, Handle> = HashMap::new();
    let mut input = |b: &mut ProofBuilder, i: usize| {
        *inputs.entry(i).or_insert_with(|| b.input(i, pnk.clauses()[i].clone()))
    };
    let mut derived: HashMap<Clause, Handle> = HashMap::new();

    let mut targets = Vec::with_capacity(psi_prime.len());
    let mut sinks = Vec::with_capacity(psi_prime.len());
    let mut per_target_steps = Vec::with_capacity(psi_prime.len());
    for c in psi_prime.clauses() {
        let t = substitute(c, &sigma)?;
        let (h, steps) = if let Some(&i) = index.get(&t) {
            (input(&mut b, i), 0)
        } else {
            // Swap a leading c2 for ¬c1 and resolve it back against (c1 ∨ c2).
            let guarded: Clause = t
                .lits()
                .iter()
                .map(|&l| if l == lay.c2().pos() { c1.neg() } else { l })
                .collect();
            let gi = *index.get(&guarded).ok_or(ReductionError::TargetMismatch(targets.len()))?;
            let h = match derived.get(&t) {
                Some(&h) => h,
                None => {
                    let a = input(&mut b, index[&or_c1]);
                    let g = input(&mut b, gi);
                    let h = b.resolve(a, g, c1);
                    derived.insert(t.clone(), h);
                    h
                }
            };
            (h, 1)
        };
        if b.clause(h) != &t {
            return Err(ReductionError::TargetMismatch(targets.len()));
        }
        targets.push(t);
        sinks.push(h);
        per_target_steps.push(steps);
    }
    let mut proof = b.finish(System::Plain, &sinks, Target::Derivation(targets));
    proof.comments = vec![
        format!("derivation of sigma(psi-embedded n={n} k={k}) from pnk n={n} k={k}"),
        "guarded clauses resolve on c1 against (c1 | c2); the literal form c1 | -c2 is not a clause of the guard".into(),
    ];
    Ok(Reduction { proof, sigma, psi_prime, pnk, per_target_steps })
}

/// Turns a plain refutation of `Ψ'` into a refutation of the formula the
/// derivation starts from.
///
/// Each step keeps a clause contained in the substituted original. A
/// resolution whose pivot image is missing from one side reuses that side;
/// weakenings reuse their premise.
pub fn compose(
    derivation: &Proof,
    refutation: &Proof,
    sigma: &Substitution,
    formula: &CnfFormula,
) -> Result<Proof, ReductionError> {
    let bad = |step: StepId, msg: &str| ReductionError::Compose { step, msg: msg.to_string() };
    let Target::Derivation(targets) = &derivation.target else {
        return Err(bad(0, "derivation has no targets"));
    };
    if refutation.system != System::Plain {
        return Err(bad(0, "refutation must be plain"));
    }

    let mut b = ProofBuilder::new();
    let mut by_id: HashMap<StepId, Handle> = HashMap::new();
    for step in &derivation.steps {
        let get = |p: StepId| by_id.get(&p).copied().ok_or_else(|| bad(step.id, "unknown premise in derivation"));
        let h = match &step.rule {
            Rule::Input(i) => {
                let c = formula.clause(*i).ok_or_else(|| bad(step.id, "input index out of range"))?;
                b.input(*i, c.clone())
            }
            Rule::Axiom(_) => return Err(bad(step.id, "derivation uses an axiom")),
            Rule::Resolve { a, b: pb, pivot, .. } => {
                let (ha, hb) = (get(*a)?, get(*pb)?);
                if !b.clause(ha).contains(pivot.pos()) || !b.clause(hb).contains(pivot.neg()) {
                    return Err(bad(step.id, "pivot absent in derivation"));
                }
                b.resolve(ha, hb, *pivot)
            }
            Rule::Weaken { premise, added, .. } => {
                let hp = get(*premise)?;
                b.weaken(hp, *added)
            }
        };
        by_id.insert(step.id, h);
    }
    let mut first: HashMap<Clause, Handle> = HashMap::new();
    for h in 0..b.len() {
        first.entry(b.clause(h).clone()).or_insert(h);
    }
    let target_handles = targets
        .iter()
        .enumerate()
        .map(|(i, t)| first.get(t).copied().ok_or(ReductionError::TargetMismatch(i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut map: HashMap<StepId, Handle> = HashMap::new();
    let mut last = None;
    for step in &refutation.steps {
        let get = |p: StepId| map.get(&p).copied().ok_or_else(|| bad(step.id, "unknown premise"));
        let h = match &step.rule {
            Rule::Input(i) => {
                *target_handles.get(*i).ok_or_else(|| bad(step.id, "input index has no derived target"))?
            }
            Rule::Axiom(_) => return Err(bad(step.id, "axiom step in a plain refutation")),
            Rule::Resolve { a, b: pb, pivot, .. } => {
                let (ha, hb) = (get(*a)?, get(*pb)?);
                let l = sigma.var(*pivot).ok_or(ReductionError::Unmapped(*pivot))?;
                let (a_has, b_has) = (b.clause(ha).contains(l), b.clause(hb).contains(!l));
                match (a_has, b_has) {
                    (true, true) if l.is_positive() => b.resolve(ha, hb, l.var()),
                    (true, true) => b.resolve(hb, ha, l.var()),
                    (false, _) => ha,
                    (true, false) => hb,
                }
            }
            Rule::Weaken { premise, .. } => get(*premise)?,
        };
        map.insert(step.id, h);
        last = Some((step.id, h));
    }
    let (id, sink) = last.ok_or_else(|| bad(0, "empty refutation"))?;
    if !b.clause(sink).is_empty() {
        return Err(bad(id, "final clause is not empty"));
    }
    let mut proof = b.finish(System::Plain, &[sink], Target::Refutation);
    proof.comments = derivation.comments.clone();
    Ok(proof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::check;

    fn cl(v: &[i64]) -> Clause {
        Clause::from_dimacs(v).unwrap()
    }

    #[test]
    fn substitute_examples() {
        let (n, k) = (3, 1);
        let s = Substitution::psi_to_pnk(n, k);
        let (e, p) = (EmbedLayout { n, k }, PnkLayout { n, k });
        let t = substitute(&Clause::new([e.x(1).pos(), e.x(2).neg()]), &s).unwrap();
        assert_eq!(t, Clause::new([p.c2().neg(), p.c2().pos()]));
        assert!(t.is_tautology());
        let t = substitute(&Clause::new([e.x(1).pos(), e.s(1, 1).neg(), e.s(2, 1).neg()]), &s).unwrap();
        assert_eq!(t, Clause::new([p.c2().neg(), p.q(1, 1).neg(), p.q(2, 1).neg()]));
        let t = substitute(&Clause::new([e.x(1).neg(), e.r(1, 1).pos()]), &s).unwrap();
        assert_eq!(t, Clause::new([p.c2().pos(), p.p(1, 1).pos()]));
        assert_eq!(substitute(&cl(&[200]), &s), Err(ReductionError::Unmapped(Var::from_index(200))));
    }

    #[test]
    fn derivation_checks() {
        for n in 2..=6 {
            for k in 1..n {
                let r = derive_reduction(n, k).unwrap();
                let report = check(&r.proof, &r.pnk, None).unwrap();
                assert!(r.per_target_steps.iter().all(|&s| s <= 2));
                assert!(report.size <= 2 * r.psi_prime.len() + r.pnk.len());
                let Target::Derivation(ts) = &r.proof.target else { panic!() };
                let expect: Vec<Clause> =
                    r.psi_prime.clauses().iter().map(|c| substitute(c, &r.sigma).unwrap()).collect();
                assert_eq!(ts, &expect);
            }
        }
    }

    #[test]
    fn guarded_p_clause_takes_one_resolution() {
        let r = derive_reduction(3, 1).unwrap();
        let p = PnkLayout { n: 3, k: 1 };
        let target = Clause::new([p.c2().pos(), p.p(1, 1).pos()]);
        let Target::Derivation(ts) = &r.proof.target else { panic!() };
        let i = ts.iter().position(|t| *t == target).unwrap();
        assert_eq!(r.per_target_steps[i], 1);
        let q = Clause::new([p.c2().neg(), p.q(1, 1).neg(), p.q(2, 1).neg()]);
        let i = ts.iter().position(|t| *t == q).unwrap();
        assert_eq!(r.per_target_steps[i], 0);
        assert!(r.proof.comments.iter().any(|c| c.contains("c1 | c2")));
    }

    #[test]
    fn compose_maps_pivot() {
        // Ψ'-side refutation of {x1, ¬x1} pushed through x1 ↦ ¬c2.
        let sigma = Substitution::new([(Var::from_index(1), Var::from_index(2).neg())].into_iter().collect());
        let f = CnfFormula::with_clauses(2, vec![cl(&[-2]), cl(&[2])]).unwrap();
        let deriv = Proof::new(
            System::Plain,
            vec![crate::proof::Step { id: 1, rule: Rule::Input(0) }, crate::proof::Step { id: 2, rule: Rule::Input(1) }],
            Target::Derivation(vec![cl(&[-2]), cl(&[2])]),
        );
        let refu = crate::trace::parse_proof("p proof 3\n1 I 1\n2 I 2\n3 R 1 2 1 0\n").unwrap();
        let out = compose(&deriv, &refu, &sigma, &f).unwrap();
        assert_eq!(check(&out, &f, None).unwrap().size, 3);
        match &out.steps[2].rule {
            Rule::Resolve { pivot, .. } => assert_eq!(pivot.id(), 2),
            r => panic!("{r:?}"),
        }
    }
}
