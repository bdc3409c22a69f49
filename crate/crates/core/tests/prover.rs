mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wres_core::axioms::{enumerate_axioms, AxiomOracle};
use wres_core::cnf::{Assignment, CnfFormula, Eval, Mode, Var};
use wres_core::families;
use wres_core::proof::check;
use wres_core::prover::{build_tree, prove_with, tree_to_proof, DecisionTree, Leaf, ProveOutcome, Strategy, TreeOutcome};

fn strategy_of(i: u8) -> Strategy {
    [Strategy::PositiveBranching, Strategy::Theta3, Strategy::Enumeration][i as usize % 3]
}

fn oracle_of(n: u32, choice: u8, k: u32) -> Option<AxiomOracle> {
    match choice % 3 {
        0 => None,
        1 => Some(AxiomOracle::new(n, k, Mode::W1)),
        _ => Some(AxiomOracle::new(n, k, Mode::W2)),
    }
}

fn all_clauses(f: &CnfFormula, o: Option<&AxiomOracle>) -> Vec<IntClause> {
    let mut cl = int_clauses(f);
    if let Some(o) = o {
        cl.extend(enumerate_axioms(o).map(|c| c.to_dimacs()));
    }
    cl
}

/// A tree with queries in random order that may stop early at any
/// falsified input clause.
fn random_tree(rng: &mut ChaCha8Rng, f: &CnfFormula, alpha: &Assignment) -> DecisionTree {
    if let Some(i) = f.first_falsified(alpha) {
        let free = (1..=f.num_vars()).any(|v| !alpha.is_assigned(Var::from_index(v)));
        if !free || rng.gen_bool(0.6) {
            return DecisionTree::leaf(Leaf::Input(i));
        }
    }
    let mut free: Vec<u32> = (1..=f.num_vars()).filter(|&v| !alpha.is_assigned(Var::from_index(v))).collect();
    free.shuffle(rng);
    let x = Var::from_index(free[0]);
    let t = random_tree(rng, f, &alpha.with(x, true));
    let e = random_tree(rng, f, &alpha.with(x, false));
    DecisionTree::query(x, t, e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outcome_matches_brute_force(seed in any::<u64>(), n in 3u32..=7, extra in 0u32..20, s in 0u8..3, o in 0u8..3, k in 0u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_3cnf(&mut rng, n, (2 * n + extra) as usize);
        let oracle = oracle_of(n, o, k);
        let all = all_clauses(&f, oracle.as_ref());
        let sat = !models(n, &all).is_empty();
        match prove_with(&f, oracle.as_ref(), strategy_of(s)).unwrap() {
            ProveOutcome::Refuted(r) => {
                prop_assert!(!sat);
                check(&r.proof, &f, oracle.as_ref()).unwrap();
                prop_assert!(r.size <= r.nodes);
            }
            ProveOutcome::Counterexample(a) => {
                prop_assert!(sat);
                prop_assert_eq!(a.len(), n as usize);
                prop_assert!(f.is_satisfied_by(&a));
                if let Some(o) = &oracle {
                    prop_assert!(enumerate_axioms(o).all(|c| c.evaluate(&a) == Eval::Satisfied));
                }
            }
        }
    }

    #[test]
    fn random_trees_convert(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = contradiction_corpus(&mut rng, 1).pop().unwrap();
        let dt = random_tree(&mut rng, &f, &Assignment::new());
        let p = tree_to_proof(&dt, &f, None).unwrap();
        let report = check(&p, &f, None).unwrap();
        prop_assert!(report.size <= dt.node_count());
    }

    #[test]
    fn positive_branching_refutes_contradictions(seed in any::<u64>(), k in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = contradiction_corpus(&mut rng, 1).pop().unwrap();
        let o = AxiomOracle::new(f.num_vars(), k, Mode::W1);
        match prove_with(&f, Some(&o), Strategy::PositiveBranching).unwrap() {
            ProveOutcome::Refuted(r) => prop_assert!(r.leaves <= 3usize.pow(k + 1)),
            ProveOutcome::Counterexample(a) => prop_assert!(false, "counterexample {a}"),
        }
    }
}

#[test]
fn theta3_size_flat_in_m() {
    for k in 1..=2usize {
        let sizes: Vec<usize> = (k + 2..=k + 6)
            .map(|m| {
                let f = families::theta3(m, k).unwrap();
                let o = AxiomOracle::new(f.num_vars(), k as u32, Mode::W1);
                match prove_with(&f, Some(&o), Strategy::Theta3).unwrap() {
                    ProveOutcome::Refuted(r) => r.size,
                    ProveOutcome::Counterexample(a) => panic!("counterexample {a}"),
                }
            })
            .collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(*hi <= 2 * *lo, "k={k}: {sizes:?}");
    }
}

#[test]
fn rejects_bad_leaf() {
    let f = complete_contradiction();
    let x = Var::from_index(1);
    // Input 0 is not falsified on both branches.
    let dt = DecisionTree::query(x, DecisionTree::leaf(Leaf::Input(0)), DecisionTree::leaf(Leaf::Input(0)));
    assert!(tree_to_proof(&dt, &f, None).is_err());
}

#[test]
fn non_3cnf_rejected_for_structured_strategies() {
    let f = families::theta(4, 1).unwrap();
    assert!(!f.is_3cnf());
    assert!(build_tree(&f, None, Strategy::PositiveBranching).is_err());
    assert!(build_tree(&f, None, Strategy::Theta3).is_err());
    assert!(matches!(build_tree(&f, None, Strategy::Enumeration), Ok(TreeOutcome::Counterexample(_))));
}
