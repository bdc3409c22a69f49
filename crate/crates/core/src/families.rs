//! Deterministic generators for the formula families.
//!
//! Variable layouts are fixed so traces can cross-reference variables by id:
//!
//! * `theta(m, k)`: `v[i][j]` (row `i ∈ [k+1]`, column `j ∈ [m]`) has id `(i-1)m + j`.
//! * `to_3cnf`: chain variables `z[c][j]` are appended after all existing
//!   variables, in source clause order `c`.
//! * `psi(n)`: `v[i]` has id `i`.
//! * `php_general(p, h)`: `p[i][j]` has id `(i-1)h + j`.
//! * `pnk(n, k)`: `c1 = 1`, `c2 = 2`, then `p[i][j]` (`j ∈ [k]`) row-major,
//!   then `q[i][j]` (`j ∈ [n-k]`) row-major.
//! * `embed_w1(F, k)`: the original variables, then `r[x<i>][j]` grouped by
//!   `i` then `j`, then `s[x<i>][j]` likewise.

use std::fmt;

use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit, Mode, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameter: {0}")]
pub struct FamilyError(pub String);

fn invalid(msg: impl Into<String>) -> FamilyError {
    FamilyError(msg.into())
}

/// A family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    Theta { m: usize, k: usize },
    Theta3 { m: usize, k: usize },
    Psi { n: usize, k: Option<usize> },
    Php { n: usize },
    Pnk { n: usize, k: usize },
    PsiEmbedded { n: usize, k: usize },
}

impl FamilySpec {
    pub fn generate(self) -> Result<CnfFormula, FamilyError> {
        match self {
            FamilySpec::Theta { m, k } => theta(m, k),
            FamilySpec::Theta3 { m, k } => theta3(m, k),
            FamilySpec::Psi { n, k } => {
                let mut f = psi(n)?;
                f.meta.family = Some(self.to_string());
                Ok(match k {
                    Some(k) => f.with_param(k as u64, Mode::W1),
                    None => f,
                })
            }
            FamilySpec::Php { n } => php(n),
            FamilySpec::Pnk { n, k } => pnk(n, k),
            FamilySpec::PsiEmbedded { n, k } => psi_embedded(n, k),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Theta { m, k } => write!(f, "theta m={m} k={k}"),
            FamilySpec::Theta3 { m, k } => write!(f, "theta3 m={m} k={k}"),
            FamilySpec::Psi { n, k: None } => write!(f, "psi n={n}"),
            FamilySpec::Psi { n, k: Some(k) } => write!(f, "psi n={n} k={k}"),
            FamilySpec::Php { n } => write!(f, "php n={n}"),
            FamilySpec::Pnk { n, k } => write!(f, "pnk n={n} k={k}"),
            FamilySpec::PsiEmbedded { n, k } => write!(f, "psi-embedded n={n} k={k}"),
        }
    }
}

fn var(id: usize) -> Var {
    Var::from_index(id as u32)
}

fn named(num_vars: usize, names: impl IntoIterator<Item = (usize, String)>) -> CnfFormula {
    let mut f = CnfFormula::new(num_vars as u32);
    for (id, name) in names {
        f.set_name(var(id), name).expect("generated names are unique");
    }
    f
}

fn push(f: &mut CnfFormula, lits: impl IntoIterator<Item = Lit>) {
    f.push(Clause::new(lits)).expect("generated literals are in range");
}

/// `Θ_{m,k}`: `k+1` disjoint positive clauses of width `m`.
pub fn theta(m: usize, k: usize) -> Result<CnfFormula, FamilyError> {
    if m == 0 {
        return Err(invalid("theta requires m >= 1"));
    }
    let id = |i: usize, j: usize| (i - 1) * m + j;
    let mut f = named(
        m * (k + 1),
        (1..=k + 1).flat_map(|i| (1..=m).map(move |j| (id(i, j), format!("v[{i}][{j}]")))),
    );
    for i in 1..=k + 1 {
        push(&mut f, (1..=m).map(|j| var(id(i, j)).pos()));
    }
    f.meta.family = Some(FamilySpec::Theta { m, k }.to_string());
    Ok(f.with_param(k as u64, Mode::W2))
}

/// Splits every clause wider than three into a chain of width-3 clauses
/// linked by fresh variables; narrower clauses are copied.
pub fn to_3cnf(formula: &CnfFormula) -> CnfFormula {
    let mut out = CnfFormula::new(formula.num_vars());
    for (v, name) in formula.names() {
        out.set_name(*v, name.clone()).expect("names copied from a valid formula");
    }
    out.meta = formula.meta.clone();
    for (c, clause) in formula.clauses().iter().enumerate() {
        let lits = clause.lits();
        let width = lits.len();
        if width <= 3 {
            out.push(clause.clone()).expect("copied clause");
            continue;
        }
        let z: Vec<Var> = (1..=width - 3)
            .map(|j| {
                let name = format!("z[{}][{}]", c + 1, j);
                let name = out.var_by_name(&name).is_none().then_some(name);
                out.new_var(name)
            })
            .collect();
        push(&mut out, [lits[0], lits[1], z[0].neg()]);
        for j in 1..width - 3 {
            push(&mut out, [z[j - 1].pos(), lits[j + 1], z[j].neg()]);
        }
        push(&mut out, [z[width - 4].pos(), lits[width - 2], lits[width - 1]]);
    }
    out
}

/// `Θ'_{m,k}`: the 3-CNF extension of `Θ_{m,k}`.
pub fn theta3(m: usize, k: usize) -> Result<CnfFormula, FamilyError> {
    let mut f = to_3cnf(&theta(m, k)?);
    f.meta.family = Some(FamilySpec::Theta3 { m, k }.to_string());
    f.meta.mode = Some(Mode::W1);
    Ok(f)
}

/// Equivalence blocks `v_i ↔ v_{i+1}` for odd `i < n`; a trailing unpaired
/// variable (odd `n`) gets no clauses.
pub(crate) fn psi_blocks(n: usize) -> CnfFormula {
    let mut f = named(n, (1..=n).map(|i| (i, format!("v[{i}]"))));
    for i in (1..n).step_by(2) {
        push(&mut f, [var(i).pos(), var(i + 1).neg()]);
        push(&mut f, [var(i + 1).pos(), var(i).neg()]);
    }
    f
}

/// `Ψ_n`: `v_1 ↔ v_2, …, v_{n-1} ↔ v_n` for even `n`.
pub fn psi(n: usize) -> Result<CnfFormula, FamilyError> {
    if n == 0 || n % 2 == 1 {
        return Err(invalid(format!("psi requires a positive even n, got {n}")));
    }
    let mut f = psi_blocks(n);
    f.meta.family = Some(FamilySpec::Psi { n, k: None }.to_string());
    Ok(f)
}

/// Pigeonhole clauses for `pigeons` pigeons and `holes` holes: hole clauses
/// (by hole, then pigeon pair) followed by pigeon clauses.
pub fn php_general(pigeons: usize, holes: usize) -> CnfFormula {
    let id = |i: usize, j: usize| (i - 1) * holes + j;
    let mut f = named(
        pigeons * holes,
        (1..=pigeons).flat_map(|i| (1..=holes).map(move |j| (id(i, j), format!("p[{i}][{j}]")))),
    );
    for j in 1..=holes {
        for i in 1..=pigeons {
            for l in i + 1..=pigeons {
                push(&mut f, [var(id(i, j)).neg(), var(id(l, j)).neg()]);
            }
        }
    }
    for i in 1..=pigeons {
        push(&mut f, (1..=holes).map(|j| var(id(i, j)).pos()));
    }
    f
}

/// `PHP_{n+1,n}`.
pub fn php(n: usize) -> Result<CnfFormula, FamilyError> {
    if n == 0 {
        return Err(invalid("php requires n >= 1"));
    }
    let mut f = php_general(n + 1, n);
    f.meta.family = Some(FamilySpec::Php { n }.to_string());
    Ok(f)
}

/// Variable ids of `P_{n,k}`.
#[derive(Debug, Clone, Copy)]
pub struct PnkLayout {
    pub n: usize,
    pub k: usize,
}

impl PnkLayout {
    pub fn c1(&self) -> Var {
        var(1)
    }
    pub fn c2(&self) -> Var {
        var(2)
    }
    pub fn p(&self, i: usize, j: usize) -> Var {
        var(2 + (i - 1) * self.k + j)
    }
    pub fn q(&self, i: usize, j: usize) -> Var {
        var(2 + self.n * self.k + (i - 1) * (self.n - self.k) + j)
    }
    pub fn num_vars(&self) -> usize {
        2 + self.n * self.n
    }
}

/// `P_{n,k}`: two pigeonhole principles guarded by `¬c1 ↔ c2`.
pub fn pnk(n: usize, k: usize) -> Result<CnfFormula, FamilyError> {
    if k == 0 || k >= n {
        return Err(invalid(format!("pnk requires 1 <= k <= n-1, got n={n} k={k}")));
    }
    let lay = PnkLayout { n, k };
    let h = n - k;
    let mut names = vec![(1, "c1".to_string()), (2, "c2".to_string())];
    for i in 1..=n {
        for j in 1..=k {
            names.push((lay.p(i, j).id() as usize, format!("p[{i}][{j}]")));
        }
    }
    for i in 1..=n {
        for j in 1..=h {
            names.push((lay.q(i, j).id() as usize, format!("q[{i}][{j}]")));
        }
    }
    let mut f = named(lay.num_vars(), names);
    let (c1, c2) = (lay.c1(), lay.c2());
    push(&mut f, [c1.neg(), c2.neg()]);
    push(&mut f, [c1.pos(), c2.pos()]);
    for j in 1..=k {
        for i in 1..=n {
            for l in i + 1..=n {
                push(&mut f, [c1.neg(), lay.p(i, j).neg(), lay.p(l, j).neg()]);
            }
        }
    }
    for i in 1..=n {
        push(&mut f, std::iter::once(c1.neg()).chain((1..=k).map(|j| lay.p(i, j).pos())));
    }
    for j in 1..=h {
        for i in 1..=n {
            for l in i + 1..=n {
                push(&mut f, [c2.neg(), lay.q(i, j).neg(), lay.q(l, j).neg()]);
            }
        }
    }
    for i in 1..=n {
        push(&mut f, std::iter::once(c2.neg()).chain((1..=h).map(|j| lay.q(i, j).pos())));
    }
    f.meta.family = Some(FamilySpec::Pnk { n, k }.to_string());
    Ok(f)
}

/// Variable ids added by [`embed_w1`].
#[derive(Debug, Clone, Copy)]
pub struct EmbedLayout {
    pub n: usize,
    pub k: usize,
}

impl EmbedLayout {
    pub fn x(&self, i: usize) -> Var {
        var(i)
    }
    pub fn r(&self, i: usize, j: usize) -> Var {
        var(self.n + (i - 1) * self.k + j)
    }
    pub fn s(&self, i: usize, j: usize) -> Var {
        var(self.n + self.n * self.k + (i - 1) * (self.n - self.k) + j)
    }
    pub fn num_vars(&self) -> usize {
        self.n + self.n * self.n
    }
}

/// Adds pigeonhole clauses forcing exactly `k` of the formula's variables
/// true: true variables map injectively into `k` holes (`r`), false ones into
/// `n-k` holes (`s`). For `k = n` (or `k = 0`) the empty disjunction is
/// dropped, leaving the unit clause `x_i` (resp. `¬x_i`).
pub fn embed_w1(formula: &CnfFormula, k: usize) -> Result<CnfFormula, FamilyError> {
    let n = formula.num_vars() as usize;
    if k > n {
        return Err(invalid(format!("embed-w1 requires k <= n, got n={n} k={k}")));
    }
    let lay = EmbedLayout { n, k };
    let h = n - k;
    let mut out = CnfFormula::new(lay.num_vars() as u32);
    for (v, name) in formula.names() {
        out.set_name(*v, name.clone()).expect("names copied from a valid formula");
    }
    let add_name = |out: &mut CnfFormula, v: Var, name: String| {
        if out.var_by_name(&name).is_none() {
            out.set_name(v, name).expect("fresh name");
        }
    };
    for i in 1..=n {
        for j in 1..=k {
            add_name(&mut out, lay.r(i, j), format!("r[x{i}][{j}]"));
        }
    }
    for i in 1..=n {
        for j in 1..=h {
            add_name(&mut out, lay.s(i, j), format!("s[x{i}][{j}]"));
        }
    }
    for c in formula.clauses() {
        out.push(c.clone()).expect("original clause");
    }
    for i in 1..=n {
        push(&mut out, std::iter::once(lay.x(i).neg()).chain((1..=k).map(|j| lay.r(i, j).pos())));
    }
    for j in 1..=k {
        for i in 1..=n {
            for l in (1..=n).filter(|&l| l != i) {
                push(&mut out, [lay.x(i).neg(), lay.r(i, j).neg(), lay.r(l, j).neg()]);
            }
        }
    }
    for i in 1..=n {
        push(&mut out, std::iter::once(lay.x(i).pos()).chain((1..=h).map(|j| lay.s(i, j).pos())));
    }
    for j in 1..=h {
        for i in 1..=n {
            for l in (1..=n).filter(|&l| l != i) {
                push(&mut out, [lay.x(i).pos(), lay.s(i, j).neg(), lay.s(l, j).neg()]);
            }
        }
    }
    out.meta.comments = formula.meta.comments.clone();
    out.meta.family = Some(match &formula.meta.family {
        Some(src) => format!("embed-w1 k={k} source={}", src.replace(' ', ",")),
        None => format!("embed-w1 k={k}"),
    });
    Ok(out)
}

/// `Ψ'_{n,k}`.
pub fn psi_embedded(n: usize, k: usize) -> Result<CnfFormula, FamilyError> {
    if k == 0 || k > n {
        return Err(invalid(format!("psi-embedded requires 1 <= k <= n, got n={n} k={k}")));
    }
    let mut f = embed_w1(&psi(n)?, k)?;
    f.meta.family = Some(FamilySpec::PsiEmbedded { n, k }.to_string());
    Ok(f)
}
