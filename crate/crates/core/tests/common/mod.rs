//! Test-only oracles, written against DIMACS integers rather than the
//! library's clause types.

#![allow(dead_code)]

pub mod reference;

use rand::Rng;
use wres_core::{Assignment, Clause, CnfFormula, Var};

pub type IntClause = Vec<i64>;

pub fn int_clauses(f: &CnfFormula) -> Vec<IntClause> {
    f.clauses().iter().map(Clause::to_dimacs).collect()
}

/// Bit `v-1` of `word` is the value of variable `v`.
pub fn satisfies(word: u64, clauses: &[IntClause]) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&l| {
            let bit = word >> (l.unsigned_abs() - 1) & 1 == 1;
            if l > 0 { bit } else { !bit }
        })
    })
}

/// All models of `clauses` over `n` variables, as words.
pub fn models(n: u32, clauses: &[IntClause]) -> Vec<u64> {
    (0..1u64 << n).filter(|&w| satisfies(w, clauses)).collect()
}

pub fn word_assignment(n: u32, word: u64) -> Assignment {
    Assignment::total(n, (1..=n).filter(|v| word >> (v - 1) & 1 == 1).map(Var::from_index))
}

/// Plain DPLL with unit propagation.
pub fn dpll(n: u32, clauses: &[IntClause]) -> Option<Vec<i8>> {
    fn go(vals: &mut Vec<i8>, clauses: &[IntClause]) -> bool {
        let mut trail = Vec::new();
        loop {
            let mut unit = None;
            for c in clauses {
                let mut open = None;
                let mut n_open = 0;
                let mut sat = false;
                for &l in c {
                    let v = vals[l.unsigned_abs() as usize];
                    let want = if l > 0 { 1 } else { -1 };
                    if v == want {
                        sat = true;
                        break;
                    }
                    if v == 0 {
                        n_open += 1;
                        open = Some(l);
                    }
                }
                if sat {
                    continue;
                }
                if n_open == 0 {
                    for v in trail {
                        vals[v] = 0;
                    }
                    return false;
                }
                if n_open == 1 {
                    unit = open;
                    break;
                }
            }
            match unit {
                Some(l) => {
                    let v = l.unsigned_abs() as usize;
                    vals[v] = if l > 0 { 1 } else { -1 };
                    trail.push(v);
                }
                None => break,
            }
        }
        let Some(v) = (1..vals.len()).find(|&v| vals[v] == 0) else { return true };
        for val in [1, -1] {
            vals[v] = val;
            if go(vals, clauses) {
                return true;
            }
        }
        vals[v] = 0;
        for v in trail {
            vals[v] = 0;
        }
        false
    }
    let mut vals = vec![0i8; n as usize + 1];
    go(&mut vals, clauses).then_some(vals)
}

pub fn binom(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// A random 3-CNF over `n` variables with `m` clauses of width three.
pub fn random_3cnf(rng: &mut impl Rng, n: u32, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let mut vs: Vec<i64> = Vec::new();
            while vs.len() < 3 {
                let v = rng.gen_range(1..=n as i64);
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
            let lits: Vec<i64> = vs.iter().map(|&v| if rng.gen() { v } else { -v }).collect();
            Clause::from_dimacs(&lits).unwrap()
        })
        .collect();
    CnfFormula::with_clauses(n, clauses).unwrap()
}

/// Brute-force-verified random 3-CNF contradictions.
pub fn contradiction_corpus(rng: &mut impl Rng, count: usize) -> Vec<CnfFormula> {
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(4..=10u32);
        let m = rng.gen_range(4 * n..=7 * n) as usize;
        let f = random_3cnf(rng, n, m);
        if models(n, &int_clauses(&f)).is_empty() {
            out.push(f);
        }
    }
    out
}

/// All eight width-3 clauses over three variables.
pub fn complete_contradiction() -> CnfFormula {
    let clauses = (0..8i64)
        .map(|s| {
            let lit = |v: i64, bit: i64| if s >> bit & 1 == 0 { v } else { -v };
            Clause::from_dimacs(&[lit(1, 0), lit(2, 1), lit(3, 2)]).unwrap()
        })
        .collect();
    CnfFormula::with_clauses(3, clauses).unwrap()
}
