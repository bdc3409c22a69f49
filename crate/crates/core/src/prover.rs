//! Tree-Resolution refutations built from Boolean decision trees.
//!
//! A decision tree queries variables until the path assignment falsifies a
//! formula clause or an augmentation axiom. Reading the tree bottom-up and
//! resolving on each queried variable yields a tree-shaped refutation.
//!
//! Strategies:
//!
//! * [`Strategy::PositiveBranching`]: branch on a clause that is not yet
//!   satisfied and whose negative literals all sit on true variables. On a
//!   contradiction such a clause always exists, and every true branch adds a
//!   true variable, so at most `k+1` true steps fit on a path.
//! * [`Strategy::Theta3`]: take the first all-positive clause that still has
//!   unassigned variables and query all of them, one row at a time. On the
//!   3-CNF extension of `Θ` these are the row-closing chain clauses, and each
//!   row leaves at most seven non-falsifying outcomes.
//! * [`Strategy::Enumeration`]: query variables in id order, pruning at
//!   falsified clauses and violated axioms.
//!
//! When a strategy has nothing left to branch on it hands the subtree to
//! enumeration, which either closes it or finds a counterexample. Branches
//! are explored true-first, so the counterexample is the first one in that
//! order.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::axioms::AxiomOracle;
use crate::cnf::{Assignment, Clause, CnfFormula, Eval, ParamInstance, Var};
use crate::proof::{check, CheckError, Handle, Proof, ProofBuilder, System, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    PositiveBranching,
    Theta3,
    Enumeration,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::PositiveBranching => "positive",
            Strategy::Theta3 => "theta3",
            Strategy::Enumeration => "enumeration",
        }
    }

    fn needs_3cnf(self) -> bool {
        matches!(self, Strategy::PositiveBranching | Strategy::Theta3)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a leaf points at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Leaf {
    /// 0-based formula clause index.
    Input(usize),
    Axiom(Clause),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Query { var: Var, if_true: usize, if_false: usize },
    Leaf(Leaf),
}

/// Arena-backed decision tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(leaf: Leaf) -> DecisionTree {
        DecisionTree { nodes: vec![Node::Leaf(leaf)] }
    }

    /// Tree querying `var` with the given subtrees.
    pub fn query(var: Var, if_true: DecisionTree, if_false: DecisionTree) -> DecisionTree {
        let t_off = 1;
        let f_off = 1 + if_true.nodes.len();
        let mut nodes = Vec::with_capacity(f_off + if_false.nodes.len());
        nodes.push(Node::Query { var, if_true: t_off, if_false: f_off });
        for (off, sub) in [(t_off, if_true), (f_off, if_false)] {
            nodes.extend(sub.nodes.into_iter().map(|n| match n {
                Node::Query { var, if_true, if_false } => {
                    Node::Query { var, if_true: if_true + off, if_false: if_false + off }
                }
                leaf => leaf,
            }));
        }
        DecisionTree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeOutcome {
    Tree(DecisionTree),
    /// A total assignment satisfying the formula and every axiom.
    Counterexample(Assignment),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("produced proof failed to check: {0}")]
    Check(#[from] CheckError),
}

enum Decision {
    Leaf(Leaf),
    Query(Var),
    Fallback,
    Counterexample(Assignment),
}

/// States the positive-branching planner may expand before it falls back
/// to the greedy clause choice.
const PLAN_BUDGET: usize = 1 << 18;

struct Context<'a> {
    formula: &'a CnfFormula,
    oracle: Option<&'a AxiomOracle>,
    memo: RefCell<HashMap<Vec<u8>, Option<usize>>>,
    budget: Cell<usize>,
}

impl Context<'_> {
    fn leaf(&self, alpha: &Assignment) -> Option<Leaf> {
        if let Some(i) = self.formula.first_falsified(alpha) {
            return Some(Leaf::Input(i));
        }
        self.oracle.and_then(|o| o.violated(alpha)).map(Leaf::Axiom)
    }

    fn is_counterexample(&self, total: &Assignment) -> bool {
        self.formula.is_satisfied_by(total)
            && self.oracle.is_none_or(|o| o.violated(total).is_none())
    }

    /// Clauses eligible for positive branching: not satisfied, and every
    /// negative literal sits on a true variable.
    fn eligible<'c>(&'c self, alpha: &'c Assignment) -> impl Iterator<Item = &'c Clause> + 'c {
        self.formula.clauses().iter().filter(move |c| {
            c.evaluate(alpha) != Eval::Satisfied
                && c.lits().iter().filter(|l| l.is_negative()).all(|l| alpha.get(l.var()) == Some(true))
        })
    }

    /// Open positive variables of eligible clauses, by clause index then id.
    fn branch_candidates(&self, alpha: &Assignment) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for c in self.eligible(alpha) {
            for l in c.lits() {
                if l.is_positive() && !alpha.is_assigned(l.var()) && !out.contains(&l.var()) {
                    out.push(l.var());
                }
            }
        }
        out
    }

    fn key(&self, alpha: &Assignment) -> Vec<u8> {
        let mut k = vec![0u8; self.formula.num_vars() as usize];
        for (v, b) in alpha.iter() {
            k[v.id() as usize - 1] = 1 + b as u8;
        }
        k
    }

    /// Fewest leaves of a positive-branching subtree below `alpha`, or `None`
    /// when a counterexample is reachable or the planning budget ran out.
    fn plan_cost(&self, alpha: &Assignment) -> Option<usize> {
        if self.leaf(alpha).is_some() {
            return Some(1);
        }
        let key = self.key(alpha);
        if let Some(&c) = self.memo.borrow().get(&key) {
            return c;
        }
        if self.budget.get() == 0 {
            return None;
        }
        self.budget.set(self.budget.get() - 1);
        let candidates = self.branch_candidates(alpha);
        let cost = if candidates.is_empty() {
            self.enumeration_cost(alpha)
        } else {
            let mut best: Option<usize> = None;
            for v in candidates {
                let t = self.plan_cost(&alpha.with(v, true));
                let f = self.plan_cost(&alpha.with(v, false));
                match (t, f) {
                    (Some(t), Some(f)) => best = Some(best.map_or(t + f, |b| b.min(t + f))),
                    _ => {
                        best = None;
                        break;
                    }
                }
            }
            best
        };
        self.memo.borrow_mut().insert(key, cost);
        cost
    }

    fn enumeration_cost(&self, alpha: &Assignment) -> Option<usize> {
        if self.leaf(alpha).is_some() {
            return Some(1);
        }
        if self.budget.get() == 0 {
            return None;
        }
        self.budget.set(self.budget.get() - 1);
        match self.enumeration(alpha) {
            Decision::Query(v) => {
                Some(self.enumeration_cost(&alpha.with(v, true))? + self.enumeration_cost(&alpha.with(v, false))?)
            }
            _ => None,
        }
    }

    fn positive_branching(&self, alpha: &Assignment) -> Decision {
        let candidates = self.branch_candidates(alpha);
        if candidates.is_empty() {
            let total = alpha.extend_false(self.formula.num_vars());
            return if self.is_counterexample(&total) {
                Decision::Counterexample(total)
            } else {
                Decision::Fallback
            };
        }
        if self.plan_cost(alpha).is_some() {
            let cost = |v: Var| {
                self.plan_cost(&alpha.with(v, true)).zip(self.plan_cost(&alpha.with(v, false))).map(|(t, f)| t + f)
            };
            if let Some(v) = candidates.iter().copied().min_by_key(|&v| cost(v).unwrap_or(usize::MAX)) {
                return Decision::Query(v);
            }
        }
        // Without a plan, take the eligible clause with the fewest open
        // positive literals.
        let open = |c: &Clause| c.lits().iter().filter(|l| l.is_positive() && !alpha.is_assigned(l.var())).count();
        let clause = self.eligible(alpha).min_by_key(|c| open(c)).expect("candidates come from eligible clauses");
        let lit = clause
            .lits()
            .iter()
            .find(|l| l.is_positive() && !alpha.is_assigned(l.var()))
            .expect("an unfalsified eligible clause has an open positive literal");
        Decision::Query(lit.var())
    }

    fn theta3(&self, alpha: &Assignment) -> Decision {
        self.formula
            .clauses()
            .iter()
            .filter(|c| !c.is_empty() && c.is_all_positive())
            .find_map(|c| c.vars().find(|&v| !alpha.is_assigned(v)))
            .map_or(Decision::Fallback, Decision::Query)
    }

    fn enumeration(&self, alpha: &Assignment) -> Decision {
        let next = (1..=self.formula.num_vars()).map(Var::from_index).find(|&v| !alpha.is_assigned(v));
        match next {
            Some(v) => Decision::Query(v),
            None if self.is_counterexample(alpha) => Decision::Counterexample(alpha.clone()),
            None => unreachable!("a total assignment without a leaf is a counterexample"),
        }
    }

    fn decide(&self, strategy: Strategy, alpha: &Assignment) -> Decision {
        if let Some(leaf) = self.leaf(alpha) {
            return Decision::Leaf(leaf);
        }
        match strategy {
            Strategy::PositiveBranching => self.positive_branching(alpha),
            Strategy::Theta3 => self.theta3(alpha),
            Strategy::Enumeration => self.enumeration(alpha),
        }
    }
}

/// Builds a decision tree for `formula` (with augmentation axioms from
/// `oracle`, if any) or finds a counterexample.
pub fn build_tree(
    formula: &CnfFormula,
    oracle: Option<&AxiomOracle>,
    strategy: Strategy,
) -> Result<TreeOutcome, ProverError> {
    if strategy.needs_3cnf() && !formula.is_3cnf() {
        return Err(ProverError::InvalidInput(format!(
            "strategy {strategy} needs a 3-CNF, found a clause of width {}",
            formula.max_width()
        )));
    }
    if oracle.is_some_and(|o| o.n != formula.num_vars()) {
        return Err(ProverError::InvalidInput("oracle variable count differs from formula".into()));
    }
    let ctx = Context { formula, oracle, memo: RefCell::default(), budget: Cell::new(PLAN_BUDGET) };

    // Placeholder nodes are filled in as their frames are popped.
    let mut nodes: Vec<Option<Node>> = vec![None];
    let mut stack: Vec<(usize, Assignment, Strategy)> = vec![(0, Assignment::new(), strategy)];
    while let Some((slot, alpha, mut current)) = stack.pop() {
        let mut decision = ctx.decide(current, &alpha);
        if let Decision::Fallback = decision {
            current = Strategy::Enumeration;
            decision = ctx.enumeration(&alpha);
        }
        match decision {
            Decision::Leaf(leaf) => nodes[slot] = Some(Node::Leaf(leaf)),
            Decision::Query(var) => {
                let t = nodes.len();
                nodes.push(None);
                nodes.push(None);
                nodes[slot] = Some(Node::Query { var, if_true: t, if_false: t + 1 });
                stack.push((t + 1, alpha.with(var, false), current));
                stack.push((t, alpha.with(var, true), current));
            }
            Decision::Counterexample(total) => return Ok(TreeOutcome::Counterexample(total)),
            Decision::Fallback => unreachable!(),
        }
    }
    let nodes = nodes.into_iter().map(|n| n.expect("every slot is filled")).collect();
    Ok(TreeOutcome::Tree(DecisionTree { nodes }))
}

/// How a query node's clause is obtained from its children.
#[derive(Debug, Clone, Copy)]
enum Plan {
    Leaf,
    Resolve,
    AdoptTrue,
    AdoptFalse,
}

/// Checks that every leaf is falsified on its path and no variable repeats
/// on a path.
pub fn validate_tree(
    dt: &DecisionTree,
    formula: &CnfFormula,
    oracle: Option<&AxiomOracle>,
) -> Result<(), ProverError> {
    let bad = |msg: String| Err(ProverError::InvalidTree(msg));
    if dt.nodes.is_empty() {
        return bad("empty tree".into());
    }
    let mut visited = vec![false; dt.nodes.len()];
    let mut stack = vec![(0usize, Assignment::new())];
    while let Some((i, alpha)) = stack.pop() {
        if std::mem::replace(&mut visited[i], true) {
            return bad(format!("node {i} is shared"));
        }
        match &dt.nodes[i] {
            Node::Query { var, if_true, if_false } => {
                if var.id() > formula.num_vars() {
                    return bad(format!("node {i} queries unknown variable {var}"));
                }
                if alpha.is_assigned(*var) {
                    return bad(format!("node {i} queries {var} twice on a path"));
                }
                for child in [*if_true, *if_false] {
                    if child >= dt.nodes.len() || child <= i {
                        return bad(format!("node {i} has an invalid child {child}"));
                    }
                }
                stack.push((*if_false, alpha.with(*var, false)));
                stack.push((*if_true, alpha.with(*var, true)));
            }
            Node::Leaf(leaf) => {
                let clause = match leaf {
                    Leaf::Input(idx) => match formula.clause(*idx) {
                        Some(c) => c,
                        None => return bad(format!("node {i} names missing clause {idx}")),
                    },
                    Leaf::Axiom(c) => {
                        if !oracle.is_some_and(|o| o.is_axiom(c)) {
                            return bad(format!("node {i} names non-axiom {c}"));
                        }
                        c
                    }
                };
                if clause.evaluate(&alpha) != Eval::Falsified {
                    return bad(format!("leaf {i} clause {clause} is not falsified on its path"));
                }
            }
        }
    }
    Ok(())
}

/// Converts a valid decision tree into a tree-like refutation.
///
/// At a query node on `x`, the two child clauses are resolved on `x` when the
/// false child holds `x` and the true child holds `¬x`; otherwise the smaller
/// child lacking `x` is adopted and the other subtree is dropped.
pub fn tree_to_proof(
    dt: &DecisionTree,
    formula: &CnfFormula,
    oracle: Option<&AxiomOracle>,
) -> Result<Proof, ProverError> {
    validate_tree(dt, formula, oracle)?;
    let len = dt.nodes.len();
    let mut clause: Vec<Option<Clause>> = vec![None; len];
    let mut size = vec![0usize; len];
    let mut plan = vec![Plan::Leaf; len];

    // Children have larger indices than their parents (checked above).
    for i in (0..len).rev() {
        match &dt.nodes[i] {
            Node::Leaf(leaf) => {
                clause[i] = Some(match leaf {
                    Leaf::Input(idx) => formula.clauses()[*idx].clone(),
                    Leaf::Axiom(c) => c.clone(),
                });
                size[i] = 1;
            }
            Node::Query { var, if_true, if_false } => {
                let ct = clause[*if_true].as_ref().expect("child computed");
                let cf = clause[*if_false].as_ref().expect("child computed");
                let t_has = ct.contains(var.neg());
                let f_has = cf.contains(var.pos());
                let (p, c, s) = if t_has && f_has {
                    (Plan::Resolve, cf.resolve(ct, *var), size[*if_true] + size[*if_false] + 1)
                } else if !t_has && (f_has || size[*if_true] <= size[*if_false]) {
                    (Plan::AdoptTrue, ct.clone(), size[*if_true])
                } else {
                    (Plan::AdoptFalse, cf.clone(), size[*if_false])
                };
                plan[i] = p;
                clause[i] = Some(c);
                size[i] = s;
            }
        }
    }
    if clause[0].as_ref().is_some_and(|c| !c.is_empty()) {
        return Err(ProverError::InvalidTree("root clause is not empty".into()));
    }

    let mut b = ProofBuilder::new();
    let mut handle: Vec<Option<Handle>> = vec![None; len];
    let mut stack: Vec<(usize, bool)> = vec![(0, false)];
    while let Some((i, expanded)) = stack.pop() {
        match (&dt.nodes[i], plan[i]) {
            (Node::Leaf(Leaf::Input(idx)), _) => {
                handle[i] = Some(b.input(*idx, formula.clauses()[*idx].clone()));
            }
            (Node::Leaf(Leaf::Axiom(c)), _) => handle[i] = Some(b.axiom(c.clone())),
            (Node::Query { if_true, .. }, Plan::AdoptTrue) => {
                if expanded {
                    handle[i] = handle[*if_true];
                } else {
                    stack.push((i, true));
                    stack.push((*if_true, false));
                }
            }
            (Node::Query { if_false, .. }, Plan::AdoptFalse) => {
                if expanded {
                    handle[i] = handle[*if_false];
                } else {
                    stack.push((i, true));
                    stack.push((*if_false, false));
                }
            }
            (Node::Query { var, if_true, if_false }, _) => {
                if expanded {
                    let hf = handle[*if_false].expect("child emitted");
                    let ht = handle[*if_true].expect("child emitted");
                    handle[i] = Some(b.resolve(hf, ht, *var));
                } else {
                    stack.push((i, true));
                    stack.push((*if_true, false));
                    stack.push((*if_false, false));
                }
            }
        }
    }
    let root = handle[0].expect("root emitted");
    Ok(b.finish(System::of_oracle(oracle), &[root], Target::Refutation))
}

/// A checked refutation with the measurements of the tree it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refutation {
    pub proof: Proof,
    pub leaves: usize,
    pub nodes: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProveOutcome {
    Refuted(Refutation),
    Counterexample(Assignment),
}

/// Builds a tree, converts it and checks the result before returning it.
pub fn prove_with(
    formula: &CnfFormula,
    oracle: Option<&AxiomOracle>,
    strategy: Strategy,
) -> Result<ProveOutcome, ProverError> {
    match build_tree(formula, oracle, strategy)? {
        TreeOutcome::Counterexample(a) => Ok(ProveOutcome::Counterexample(a)),
        TreeOutcome::Tree(dt) => {
            let proof = tree_to_proof(&dt, formula, oracle)?;
            let report = check(&proof, formula, oracle)?;
            Ok(ProveOutcome::Refuted(Refutation {
                proof,
                leaves: dt.leaf_count(),
                nodes: dt.node_count(),
                size: report.size,
            }))
        }
    }
}

pub fn prove(instance: &ParamInstance, strategy: Strategy) -> Result<ProveOutcome, ProverError> {
    let oracle = instance.oracle();
    prove_with(&instance.formula, Some(&oracle), strategy)
}
