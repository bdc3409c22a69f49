//! Propositional data model: variables, literals, canonical clauses, formulas
//! and partial assignments.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building clauses and formulas from raw integers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("variable id must be positive, got {0}")]
    NonPositiveVariable(i64),
    #[error("variable {var} exceeds the declared variable count {num_vars}")]
    VariableOutOfRange { var: u32, num_vars: u32 },
    #[error("variable name {0:?} is used for more than one variable")]
    DuplicateName(String),
}

/// A propositional variable, identified by a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Result<Var, CnfError> {
        if id == 0 {
            return Err(CnfError::NonPositiveVariable(0));
        }
        Ok(Var(id))
    }

    /// # Panics
    ///
    /// If `id` is zero.
    pub fn from_index(id: u32) -> Var {
        assert!(id > 0, "variable ids start at 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit { var: self, negated: false }
    }

    pub fn neg(self) -> Lit {
        Lit { var: self, negated: true }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal. Literals order by variable first, and the positive literal of a
/// variable sorts before the negative one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lit {
    var: Var,
    negated: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, negated: !positive }
    }

    /// Parses a non-zero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Result<Lit, CnfError> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX) {
            return Err(CnfError::NonPositiveVariable(value));
        }
        let var = Var(value.unsigned_abs() as u32);
        Ok(Lit { var, negated: value < 0 })
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.0);
        if self.negated {
            -id
        } else {
            id
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        !self.negated
    }

    pub fn is_negative(self) -> bool {
        self.negated
    }

    /// Value of this literal under `value` for its variable.
    pub fn holds_when(self, value: bool) -> bool {
        value != self.negated
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit { var: self.var, negated: !self.negated }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// A disjunction of literals in canonical form: sorted, without repeated
/// literals. Both polarities of a variable may be present.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    /// Sorts and deduplicates. Tautologies are kept as they are.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Clause {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    /// Builds a clause from DIMACS integers, rejecting zero.
    pub fn from_dimacs(values: &[i64]) -> Result<Clause, CnfError> {
        let lits = values
            .iter()
            .map(|&v| Lit::from_dimacs(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Clause::new(lits))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, var: Var) -> bool {
        self.contains(var.pos()) || self.contains(var.neg())
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.windows(2).any(|w| w[0].var == w[1].var)
    }

    pub fn max_var(&self) -> Option<Var> {
        self.lits.last().map(|l| l.var)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let mut last = None;
        self.lits.iter().filter_map(move |l| {
            if last == Some(l.var) {
                None
            } else {
                last = Some(l.var);
                Some(l.var)
            }
        })
    }

    pub fn is_all_positive(&self) -> bool {
        self.lits.iter().all(|l| l.is_positive())
    }

    pub fn is_all_negative(&self) -> bool {
        self.lits.iter().all(|l| l.is_negative())
    }

    /// Clause with `lit` added.
    pub fn with(&self, lit: Lit) -> Clause {
        match self.lits.binary_search(&lit) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut lits = self.lits.clone();
                lits.insert(pos, lit);
                Clause { lits }
            }
        }
    }

    /// Resolvent `(self \ {pivot}) ∪ (other \ {¬pivot})` computed by a
    /// sorted merge. Only the resolved pair is removed; any other
    /// complementary pair survives.
    pub fn resolve(&self, other: &Clause, pivot: Var) -> Clause {
        let drop_a = pivot.pos();
        let drop_b = pivot.neg();
        let a = self.lits.iter().copied().filter(|&l| l != drop_a);
        let b = other.lits.iter().copied().filter(|&l| l != drop_b);
        let mut lits = Vec::with_capacity(self.len() + other.len());
        lits.extend(itertools::merge(a, b));
        lits.dedup();
        Clause { lits }
    }

    pub fn evaluate(&self, alpha: &Assignment) -> Eval {
        let mut open = false;
        for &lit in &self.lits {
            match alpha.get(lit.var) {
                Some(value) if lit.holds_when(value) => return Eval::Satisfied,
                Some(_) => {}
                None => open = true,
            }
        }
        if open {
            Eval::Undetermined
        } else {
            Eval::Falsified
        }
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }
}

impl FromIterator<Lit> for Clause {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        Clause::new(iter)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        write!(f, "(")?;
        for (i, lit) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ")")
    }
}

/// Outcome of evaluating a clause under a partial assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eval {
    Satisfied,
    Falsified,
    Undetermined,
}

/// Which augmentation axioms accompany a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Exact weight `k`: negative width-`k+1` and positive width-`n-k+1` axioms.
    W1,
    /// Weight at most `k`: negative width-`k+1` axioms only.
    W2,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::W1 => "w1",
            Mode::W2 => "w2",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "w1" => Some(Mode::W1),
            "w2" => Some(Mode::W2),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metadata carried in DIMACS comment lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    /// Provenance, e.g. `theta m=2 k=1`.
    pub family: Option<String>,
    pub param_k: Option<u64>,
    pub mode: Option<Mode>,
    /// Free-form comments, without the leading `c `.
    pub comments: Vec<String>,
}

/// A CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    names: BTreeMap<Var, String>,
    pub meta: Metadata,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> CnfFormula {
        CnfFormula { num_vars, ..CnfFormula::default() }
    }

    pub fn with_clauses(num_vars: u32, clauses: Vec<Clause>) -> Result<CnfFormula, CnfError> {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.push(c)?;
        }
        Ok(f)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> Option<&Clause> {
        self.clauses.get(index)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn push(&mut self, clause: Clause) -> Result<(), CnfError> {
        if let Some(v) = clause.max_var() {
            if v.id() > self.num_vars {
                return Err(CnfError::VariableOutOfRange { var: v.id(), num_vars: self.num_vars });
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Allocates a fresh variable, optionally named.
    pub fn new_var(&mut self, name: Option<String>) -> Var {
        self.num_vars += 1;
        let v = Var(self.num_vars);
        if let Some(name) = name {
            self.names.insert(v, name);
        }
        v
    }

    pub fn set_name(&mut self, var: Var, name: impl Into<String>) -> Result<(), CnfError> {
        if var.id() > self.num_vars {
            return Err(CnfError::VariableOutOfRange { var: var.id(), num_vars: self.num_vars });
        }
        let name = name.into();
        if self.names.iter().any(|(&v, n)| v != var && *n == name) {
            return Err(CnfError::DuplicateName(name));
        }
        self.names.insert(var, name);
        Ok(())
    }

    pub fn name(&self, var: Var) -> Option<&str> {
        self.names.get(&var).map(String::as_str)
    }

    pub fn names(&self) -> &BTreeMap<Var, String> {
        &self.names
    }

    pub fn var_by_name(&self, name: &str) -> Option<Var> {
        self.names.iter().find(|(_, n)| *n == name).map(|(&v, _)| v)
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    pub fn is_3cnf(&self) -> bool {
        self.max_width() <= 3
    }

    /// Index of the first clause falsified by `alpha`.
    pub fn first_falsified(&self, alpha: &Assignment) -> Option<usize> {
        self.clauses.iter().position(|c| c.evaluate(alpha) == Eval::Falsified)
    }

    /// True iff every clause is satisfied by `alpha`.
    pub fn is_satisfied_by(&self, alpha: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.evaluate(alpha) == Eval::Satisfied)
    }

    pub fn with_param(mut self, k: u64, mode: Mode) -> CnfFormula {
        self.meta.param_k = Some(k);
        self.meta.mode = Some(mode);
        self
    }
}

/// A partial assignment of truth values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// Total assignment setting exactly `trues` to true on `1..=n`.
    pub fn total(n: u32, trues: impl IntoIterator<Item = Var>) -> Assignment {
        let mut a: Assignment = (1..=n).map(|i| (Var(i), false)).collect();
        for v in trues {
            a.set(v, true);
        }
        a
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values.insert(var, value);
    }

    pub fn with(&self, var: Var, value: bool) -> Assignment {
        let mut a = self.clone();
        a.set(var, value);
        a
    }

    pub fn is_assigned(&self, var: Var) -> bool {
        self.values.contains_key(&var)
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var).map(|v| lit.holds_when(v))
    }

    /// Number of variables mapped to true.
    pub fn weight(&self) -> usize {
        self.values.values().filter(|&&v| v).count()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    pub fn true_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.iter().filter(|&(_, b)| b).map(|(v, _)| v)
    }

    pub fn false_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.iter().filter(|&(_, b)| !b).map(|(v, _)| v)
    }

    /// Every variable of `1..=n` not yet assigned is set to false.
    pub fn extend_false(&self, n: u32) -> Assignment {
        let mut a = self.clone();
        for i in 1..=n {
            a.values.entry(Var(i)).or_insert(false);
        }
        a
    }

    /// Signed DIMACS literals, one per assigned variable.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.iter().map(|(v, b)| Lit::new(v, b).to_dimacs()).collect()
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment { values: iter.into_iter().collect() }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, b)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}:{b}")?;
        }
        write!(f, "}}")
    }
}

/// A formula with a parameter `k` and the weight semantics it is read under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamInstance {
    pub formula: CnfFormula,
    pub k: u32,
    pub mode: Mode,
}

impl ParamInstance {
    pub fn new(formula: CnfFormula, k: u32, mode: Mode) -> ParamInstance {
        ParamInstance { formula, k, mode }
    }

    /// Axiom oracle over all declared variables of the formula.
    pub fn oracle(&self) -> crate::axioms::AxiomOracle {
        crate::axioms::AxiomOracle::new(self.formula.num_vars(), self.k, self.mode)
    }
}

/// Weight of a partial assignment.
pub fn weight(alpha: &Assignment) -> usize {
    alpha.weight()
}
