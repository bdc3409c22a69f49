//! Lazy access to the augmentation axioms of parameterized Resolution.
//!
//! Over variables `x_1..x_n` with parameter `k`:
//!
//! * negative axioms: `¬x_{i_1} ∨ … ∨ ¬x_{i_{k+1}}` for `i_1 < … < i_{k+1}`
//!   (both modes),
//! * positive axioms: `x_{i_1} ∨ … ∨ x_{i_{n-k+1}}` (W1 only).
//!
//! Neither set is ever materialized by the checker; membership is decided
//! per clause. Positive axioms exist only for `1 <= k <= n`.

use itertools::Itertools;
use num_bigint::BigUint;

use crate::cnf::{Assignment, Clause, Mode, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomOracle {
    pub n: u32,
    pub k: u32,
    pub mode: Mode,
}

impl AxiomOracle {
    pub fn new(n: u32, k: u32, mode: Mode) -> AxiomOracle {
        AxiomOracle { n, k, mode }
    }

    /// Width of the negative axioms, if any exist.
    pub fn negative_width(&self) -> Option<usize> {
        let w = self.k as usize + 1;
        (w <= self.n as usize).then_some(w)
    }

    /// Width of the positive axioms, if any exist.
    pub fn positive_width(&self) -> Option<usize> {
        match self.mode {
            Mode::W2 => None,
            Mode::W1 => {
                (self.k >= 1 && self.k <= self.n).then(|| (self.n - self.k + 1) as usize)
            }
        }
    }

    pub fn is_axiom(&self, clause: &Clause) -> bool {
        if clause.is_empty() || clause.max_var().is_some_and(|v| v.id() > self.n) {
            return false;
        }
        // Canonical clauses list each variable at most once unless tautological.
        if clause.is_tautology() {
            return false;
        }
        let width = clause.len();
        (clause.is_all_negative() && self.negative_width() == Some(width))
            || (clause.is_all_positive() && self.positive_width() == Some(width))
    }

    pub fn count(&self) -> BigUint {
        let n = self.n as usize;
        let neg = self.negative_width().map_or_else(BigUint::default, |w| binomial(n, w));
        let pos = self.positive_width().map_or_else(BigUint::default, |w| binomial(n, w));
        neg + pos
    }

    /// All axioms, negative ones first, each in lexicographic order of the
    /// variable tuple.
    pub fn enumerate(&self) -> impl Iterator<Item = Clause> {
        let this = *self;
        let vars = move |n: u32| (1..=n).map(Var::from_index);
        let neg = this
            .negative_width()
            .into_iter()
            .flat_map(move |w| vars(this.n).combinations(w))
            .map(|vs| vs.into_iter().map(Var::neg).collect::<Clause>());
        let pos = this
            .positive_width()
            .into_iter()
            .flat_map(move |w| vars(this.n).combinations(w))
            .map(|vs| vs.into_iter().map(Var::pos).collect::<Clause>());
        neg.chain(pos)
    }

    /// An axiom falsified by `alpha`: the negative axiom over the `k+1`
    /// smallest true variables, else (W1) the positive axiom over the `n-k+1`
    /// smallest false variables.
    pub fn violated(&self, alpha: &Assignment) -> Option<Clause> {
        let in_range = |v: &Var| v.id() <= self.n;
        if let Some(w) = self.negative_width() {
            let trues: Vec<Var> = alpha.true_vars().filter(in_range).take(w).collect();
            if trues.len() == w {
                return Some(trues.into_iter().map(Var::neg).collect());
            }
        }
        if let Some(w) = self.positive_width() {
            let falses: Vec<Var> = alpha.false_vars().filter(in_range).take(w).collect();
            if falses.len() == w {
                return Some(falses.into_iter().map(Var::pos).collect());
            }
        }
        None
    }
}

pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::default();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::from(1u32);
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn is_axiom(oracle: &AxiomOracle, clause: &Clause) -> bool {
    oracle.is_axiom(clause)
}

pub fn count_axioms(oracle: &AxiomOracle) -> BigUint {
    oracle.count()
}

pub fn enumerate_axioms(oracle: &AxiomOracle) -> impl Iterator<Item = Clause> {
    oracle.enumerate()
}

pub fn violated_axiom(oracle: &AxiomOracle, alpha: &Assignment) -> Option<Clause> {
    oracle.violated(alpha)
}
