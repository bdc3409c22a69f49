//! Exhaustive ground truth for small instances.
//!
//! Every search visits assignments in a fixed order and returns the first
//! witness it meets, so results are reproducible. Total enumeration treats an
//! assignment as the bit string `x_1 … x_n` (false before true) and counts
//! upwards; weighted searches walk `k`-subsets of true variables in
//! lexicographic order.

use std::thread;

use itertools::Itertools;
use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::axioms::{binomial, AxiomOracle};
use crate::cnf::{Assignment, Clause, CnfFormula, Mode, Var};

pub const DEFAULT_TOTAL_BUDGET: u64 = 1 << 22;
pub const DEFAULT_COMBINATION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error("budget exceeded: {what} needs {needed} assignments, budget is {budget}")]
    BudgetExceeded { what: &'static str, needed: String, budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Enumeration limits. `jobs > 1` splits total enumeration across threads
/// by assignment prefix; results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub total: u64,
    pub combinations: u64,
    pub jobs: usize,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { total: DEFAULT_TOTAL_BUDGET, combinations: DEFAULT_COMBINATION_BUDGET, jobs: 1 }
    }
}

impl Budget {
    /// Defaults, with `WRES_BUDGET` (if set and numeric) as the total cap.
    pub fn from_env() -> Budget {
        let mut b = Budget::default();
        if let Some(total) = std::env::var("WRES_BUDGET").ok().and_then(|v| v.trim().parse().ok()) {
            b.total = total;
        }
        b
    }

    fn total_for(&self, what: &'static str, n: u32) -> Result<u64, SemanticError> {
        let needed = BigUint::from(1u32) << n as usize;
        if n >= 64 || needed > BigUint::from(self.total) {
            return Err(SemanticError::BudgetExceeded { what, needed: needed.to_string(), budget: self.total });
        }
        Ok(1u64 << n)
    }

    fn combinations_for(&self, what: &'static str, needed: BigUint) -> Result<(), SemanticError> {
        if needed > BigUint::from(self.combinations) {
            return Err(SemanticError::BudgetExceeded { what, needed: needed.to_string(), budget: self.combinations });
        }
        Ok(())
    }
}

/// Outcome of a contradiction test: either the property holds, or a witness
/// assignment refutes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Witness(Assignment),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            Verdict::Holds => None,
            Verdict::Witness(a) => Some(a),
        }
    }
}

/// Clause as bit masks over an `n`-variable assignment word, with `x_1` in
/// the most significant used bit.
#[derive(Debug, Clone, Copy)]
struct Mask {
    pos: u64,
    neg: u64,
}

impl Mask {
    fn of(c: &Clause, n: u32) -> Mask {
        let mut m = Mask { pos: 0, neg: 0 };
        for l in c.lits() {
            let bit = 1u64 << (n - l.var().id());
            if l.is_positive() {
                m.pos |= bit;
            } else {
                m.neg |= bit;
            }
        }
        m
    }

    fn satisfied(self, word: u64) -> bool {
        word & self.pos != 0 || !word & self.neg != 0
    }
}

fn word_to_assignment(word: u64, n: u32) -> Assignment {
    Assignment::total(n, (1..=n).filter(|v| word >> (n - v) & 1 == 1).map(Var::from_index))
}

/// First word in `0..count` accepted by `accept`, split across `jobs`
/// contiguous ranges.
fn first_word(count: u64, jobs: usize, accept: &(dyn Fn(u64) -> bool + Sync)) -> Option<u64> {
    let jobs = jobs.clamp(1, 64) as u64;
    if jobs == 1 || count < 1 << 12 {
        return (0..count).find(|&w| accept(w));
    }
    let chunk = count.div_ceil(jobs);
    thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let lo = (j * chunk).min(count);
                let hi = ((j + 1) * chunk).min(count);
                s.spawn(move || (lo..hi).find(|&w| accept(w)))
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().expect("worker panicked")).next()
    })
}

fn masks(clauses: &[Clause], n: u32) -> Vec<Mask> {
    clauses.iter().map(|c| Mask::of(c, n)).collect()
}

/// First satisfying total assignment, if any.
pub fn find_model(formula: &CnfFormula, budget: &Budget) -> Result<Option<Assignment>, SemanticError> {
    let n = formula.num_vars();
    let count = budget.total_for("total enumeration", n)?;
    let ms = masks(formula.clauses(), n);
    let accept = |w: u64| ms.iter().all(|m| m.satisfied(w));
    Ok(first_word(count, budget.jobs, &accept).map(|w| word_to_assignment(w, n)))
}

pub fn is_unsat(formula: &CnfFormula, budget: &Budget) -> Result<Verdict, SemanticError> {
    Ok(find_model(formula, budget)?.map_or(Verdict::Holds, Verdict::Witness))
}

fn first_with_weight(formula: &CnfFormula, w: usize) -> Option<Assignment> {
    let n = formula.num_vars();
    (1..=n).map(Var::from_index).combinations(w).find_map(|trues| {
        let a = Assignment::total(n, trues);
        formula.is_satisfied_by(&a).then_some(a)
    })
}

/// Holds iff no total assignment of weight exactly `k` satisfies `formula`.
pub fn is_wpcon(formula: &CnfFormula, k: usize, budget: &Budget) -> Result<Verdict, SemanticError> {
    let n = formula.num_vars() as usize;
    budget.combinations_for("weight-k enumeration", binomial(n, k))?;
    Ok(first_with_weight(formula, k).map_or(Verdict::Holds, Verdict::Witness))
}

/// Holds iff no total assignment of weight at most `k` satisfies `formula`.
/// Witnesses have the smallest possible weight.
pub fn is_pcon(formula: &CnfFormula, k: usize, budget: &Budget) -> Result<Verdict, SemanticError> {
    let n = formula.num_vars() as usize;
    let needed = (0..=k.min(n)).map(|w| binomial(n, w)).sum();
    budget.combinations_for("weight-at-most-k enumeration", needed)?;
    for w in 0..=k.min(n) {
        if let Some(a) = first_with_weight(formula, w) {
            return Ok(Verdict::Witness(a));
        }
    }
    Ok(Verdict::Holds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NecessityEntry {
    /// 0-based position in `Γ`.
    pub index: usize,
    pub clause: Vec<i64>,
    /// Whether the clause set stays satisfiable once this clause is dropped.
    pub satisfiable_without: bool,
    /// DIMACS literals of the witness, one per variable.
    pub witness: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NecessityReport {
    pub entries: Vec<NecessityEntry>,
    pub all_necessary: bool,
}

impl NecessityReport {
    pub fn necessary_count(&self) -> usize {
        self.entries.iter().filter(|e| e.satisfiable_without).count()
    }
}

/// Does the set of context axioms violated by `word` consist of `gamma`
/// alone (or nothing)?
fn context_ok(oracle: &AxiomOracle, word: u64, gamma: &Mask, gamma_len: usize) -> bool {
    let n = oracle.n;
    let used = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let trues = word & used;
    let weight = trues.count_ones() as usize;
    let falses = n as usize - weight;
    let mut violations = 0;
    let mut gamma_hit = false;
    if let Some(w) = oracle.negative_width() {
        if weight > w {
            return false;
        }
        if weight == w {
            violations += 1;
            gamma_hit |= gamma.pos == 0 && gamma.neg == trues && gamma_len == w;
        }
    }
    if let Some(w) = oracle.positive_width() {
        if falses > w {
            return false;
        }
        if falses == w {
            violations += 1;
            gamma_hit |= gamma.neg == 0 && gamma.pos == !word & used && gamma_len == w;
        }
    }
    match violations {
        0 => true,
        1 => gamma_hit,
        _ => false,
    }
}

/// For each `γ ∈ Γ`, searches for a model of the formula, `Γ` without that
/// position, and every context axiom other than `γ`. `Γ` is necessary when
/// every such search succeeds.
pub fn verify_necessity(
    formula: &CnfFormula,
    gamma: &[Clause],
    context: Option<&AxiomOracle>,
    budget: &Budget,
) -> Result<NecessityReport, SemanticError> {
    let n = formula.num_vars();
    if let Some(o) = context {
        if o.n != n {
            return Err(SemanticError::InvalidParameter(format!(
                "context covers {} variables, formula has {n}",
                o.n
            )));
        }
    }
    if let Some(c) = gamma.iter().find(|c| c.max_var().is_some_and(|v| v.id() > n)) {
        return Err(SemanticError::InvalidParameter(format!("clause {c} mentions a variable beyond {n}")));
    }
    budget.combinations_for("necessity clauses", BigUint::from(gamma.len()))?;
    let count = budget.total_for("necessity enumeration", n)?;
    let base = masks(formula.clauses(), n);
    let gm = masks(gamma, n);

    let mut entries = Vec::with_capacity(gamma.len());
    for (i, g) in gamma.iter().enumerate() {
        let own = gm[i];
        let accept = |w: u64| {
            base.iter().all(|m| m.satisfied(w))
                && gm.iter().enumerate().all(|(j, m)| j == i || m.satisfied(w))
                && context.is_none_or(|o| context_ok(o, w, &own, g.len()))
        };
        let witness = first_word(count, budget.jobs, &accept).map(|w| word_to_assignment(w, n));
        entries.push(NecessityEntry {
            index: i,
            clause: g.to_dimacs(),
            satisfiable_without: witness.is_some(),
            witness: witness.map(|a| a.to_dimacs()),
        });
    }
    let all_necessary = entries.iter().all(|e| e.satisfiable_without);
    Ok(NecessityReport { entries, all_necessary })
}

/// Families with a known unavoidable axiom set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaFamily {
    Theta { m: usize, k: usize },
    Psi { n: usize, k: usize },
}

impl GammaFamily {
    /// The context axioms the set is checked against.
    pub fn context(self) -> AxiomOracle {
        match self {
            GammaFamily::Theta { m, k } => AxiomOracle::new((m * (k + 1)) as u32, k as u32, Mode::W2),
            GammaFamily::Psi { n, k } => AxiomOracle::new(n as u32, k as u32, Mode::W1),
        }
    }
}

/// Theta: one variable from each row, negated, for every choice of columns.
/// Psi: every choice of `(k+1)/2` complete pairs, negated (odd `k` only).
pub fn gamma_for(family: GammaFamily) -> Result<Vec<Clause>, SemanticError> {
    match family {
        GammaFamily::Theta { m, k } => {
            if m == 0 {
                return Err(SemanticError::InvalidParameter("theta requires m >= 1".into()));
            }
            Ok((0..=k)
                .map(|_| 1..=m)
                .multi_cartesian_product()
                .map(|cols| {
                    cols.iter().enumerate().map(|(row, &j)| Var::from_index((row * m + j) as u32).neg()).collect()
                })
                .collect())
        }
        GammaFamily::Psi { n, k } => {
            if n == 0 || n % 2 == 1 {
                return Err(SemanticError::InvalidParameter(format!("psi requires a positive even n, got {n}")));
            }
            if k % 2 == 0 {
                return Err(SemanticError::InvalidParameter(format!("psi gamma requires odd k, got {k}")));
            }
            Ok((1..=n / 2)
                .combinations(k.div_ceil(2))
                .map(|pairs| {
                    pairs
                        .iter()
                        .flat_map(|&a| [2 * a - 1, 2 * a])
                        .map(|v| Var::from_index(v as u32).neg())
                        .collect()
                })
                .collect())
        }
    }
}
