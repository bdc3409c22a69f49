//! Checking, building and reducing W[1]/W[2]-parameterized Resolution proofs.

pub mod axioms;
pub mod cnf;
pub mod dimacs;
pub mod families;
pub mod proof;
pub mod prover;
pub mod reduction;
pub mod semantic;
pub mod trace;

pub use axioms::AxiomOracle;
pub use cnf::{Assignment, Clause, CnfFormula, Lit, Mode, ParamInstance, Var};
pub use proof::{check, Proof, System, Target};
