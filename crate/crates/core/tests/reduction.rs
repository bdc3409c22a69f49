mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wres_core::cnf::{CnfFormula, Lit, Var};
use wres_core::families;
use wres_core::proof::{check, ProofBuilder, System, Target};
use wres_core::prover::{prove_with, ProveOutcome, Strategy};
use wres_core::reduction::{compose, derive_reduction, psi_prime, substitute, Substitution};

#[test]
fn psi_prime_refutation_becomes_pnk_refutation() {
    let (n, k) = (4, 1);
    let r = derive_reduction(n, k).unwrap();
    let pp = psi_prime(n, k).unwrap();
    assert_eq!(pp, r.psi_prime);
    let ProveOutcome::Refuted(refu) = prove_with(&pp, None, Strategy::Enumeration).unwrap() else {
        panic!("psi' should be unsatisfiable");
    };
    let out = compose(&r.proof, &refu.proof, &r.sigma, &r.pnk).unwrap();
    let report = check(&out, &families::pnk(n, k).unwrap(), None).unwrap();
    let derivation_size = check(&r.proof, &r.pnk, None).unwrap().total_steps;
    assert!(report.size <= refu.size + derivation_size, "{} > {} + {derivation_size}", report.size, refu.size);
}

#[test]
fn odd_n_psi_prime_is_satisfiable() {
    let pp = psi_prime(3, 1).unwrap();
    assert!(dpll(pp.num_vars(), &int_clauses(&pp)).is_some());
    assert!(matches!(prove_with(&pp, None, Strategy::Enumeration).unwrap(), ProveOutcome::Counterexample(_)));
}

#[test]
fn every_substituted_clause_is_a_target() {
    for (n, k) in [(2, 1), (4, 2), (5, 2), (6, 5)] {
        let r = derive_reduction(n, k).unwrap();
        let Target::Derivation(targets) = &r.proof.target else { panic!() };
        for c in r.psi_prime.clauses() {
            assert!(targets.contains(&substitute(c, &r.sigma).unwrap()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Any substitution pushes a refutation of `F` onto `σ(F)` given as
    /// input clauses.
    #[test]
    fn compose_under_random_substitution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = contradiction_corpus(&mut rng, 1).pop().unwrap();
        let m = rng.gen_range(2..=f.num_vars());
        let sigma = Substitution::new(
            (1..=f.num_vars())
                .map(|v| (Var::from_index(v), Lit::new(Var::from_index(rng.gen_range(1..=m)), rng.gen_bool(0.5))))
                .collect(),
        );
        let image: Vec<_> = f.clauses().iter().map(|c| substitute(c, &sigma).unwrap()).collect();
        let g = CnfFormula::with_clauses(m, image.clone()).unwrap();
        let mut b = ProofBuilder::new();
        let hs: Vec<_> = image.iter().enumerate().map(|(i, c)| b.input(i, c.clone())).collect();
        let deriv = b.finish(System::Plain, &hs, Target::Derivation(image));
        let ProveOutcome::Refuted(refu) = prove_with(&f, None, Strategy::Enumeration).unwrap() else {
            panic!("corpus formula satisfiable");
        };
        let out = compose(&deriv, &refu.proof, &sigma, &g).unwrap();
        let report = check(&out, &g, None).unwrap();
        prop_assert!(report.size <= refu.size + g.len());
    }
}
