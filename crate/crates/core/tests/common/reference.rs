//! Second, independent reading of proof traces: its own tokenizer, clause
//! sets and axiom test. Used to tell genuinely invalid mutants from ones
//! that happen to remain valid.

use std::collections::{BTreeSet, HashMap};

pub struct Expect<'a> {
    pub clauses: &'a [Vec<i64>],
    pub n: i64,
    /// `None` for plain Resolution, else (w1?, k).
    pub param: Option<(bool, i64)>,
}

fn canonical(lits: &[i64]) -> bool {
    let key = |l: i64| (l.abs(), l < 0);
    lits.windows(2).all(|w| key(w[0]) < key(w[1]))
}

fn is_axiom(c: &BTreeSet<i64>, e: &Expect) -> bool {
    let Some((w1, k)) = e.param else { return false };
    if c.is_empty() || c.iter().any(|l| l.abs() > e.n) {
        return false;
    }
    let vars: BTreeSet<i64> = c.iter().map(|l| l.abs()).collect();
    if vars.len() != c.len() {
        return false;
    }
    let w = c.len() as i64;
    (c.iter().all(|&l| l < 0) && w == k + 1)
        || (w1 && k >= 1 && k <= e.n && c.iter().all(|&l| l > 0) && w == e.n - k + 1)
}

/// Literal list ending in a single trailing 0.
fn lits(toks: &[&str]) -> Option<Vec<i64>> {
    let (last, body) = toks.split_last()?;
    if *last != "0" {
        return None;
    }
    let v: Option<Vec<i64>> = body.iter().map(|t| t.parse::<i64>().ok().filter(|&x| x != 0)).collect();
    let v = v?;
    canonical(&v).then_some(v)
}

pub fn valid(text: &str, e: &Expect) -> bool {
    check(text, e).is_some()
}

fn check(text: &str, e: &Expect) -> Option<()> {
    let mut header: Option<usize> = None;
    let mut derived: Vec<BTreeSet<i64>> = Vec::new();
    let mut by_id: HashMap<u64, usize> = HashMap::new();
    let mut last_id = 0u64;
    let mut targets: Vec<BTreeSet<i64>> = Vec::new();
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(&first) = toks.first() else { continue };
        if first == "c" {
            continue;
        }
        if first == "p" {
            if header.is_some() || !derived.is_empty() || !targets.is_empty() || toks.get(1) != Some(&"proof") {
                return None;
            }
            let count: usize = toks.get(2)?.parse().ok()?;
            let param = match toks.len() {
                3 => None,
                5 => {
                    let k: i64 = toks[4].parse().ok()?;
                    if k < 0 || k > u32::MAX as i64 {
                        return None;
                    }
                    match toks[3] {
                        "plain" => None,
                        "w1" => Some((true, k)),
                        "w2" => Some((false, k)),
                        _ => return None,
                    }
                }
                _ => return None,
            };
            if param != e.param {
                return None;
            }
            header = Some(count);
            continue;
        }
        header?;
        if first == "t" {
            targets.push(lits(&toks[1..])?.into_iter().collect());
            continue;
        }
        if !targets.is_empty() {
            return None;
        }
        let id: u64 = first.parse().ok()?;
        if id <= last_id || id > u32::MAX as u64 {
            return None;
        }
        last_id = id;
        let premise = |t: &str| -> Option<&BTreeSet<i64>> {
            let p: u64 = t.parse().ok()?;
            if p >= id {
                return None;
            }
            by_id.get(&p).map(|&i| &derived[i])
        };
        let in_range = |c: &BTreeSet<i64>| c.iter().all(|l| l.abs() <= e.n);
        let clause: BTreeSet<i64> = match *toks.get(1)? {
            "I" => {
                if toks.len() != 3 {
                    return None;
                }
                let i: usize = toks[2].parse().ok()?;
                if i == 0 || i > e.clauses.len() {
                    return None;
                }
                e.clauses[i - 1].iter().copied().collect()
            }
            "A" => {
                let c: BTreeSet<i64> = lits(&toks[2..])?.into_iter().collect();
                if !is_axiom(&c, e) {
                    return None;
                }
                c
            }
            "R" => {
                let (a, b) = (premise(toks.get(2)?)?, premise(toks.get(3)?)?);
                let p: i64 = toks.get(4)?.parse().ok()?;
                if p <= 0 || p > e.n {
                    return None;
                }
                let d: BTreeSet<i64> = lits(&toks[5..])?.into_iter().collect();
                if !in_range(&d) || !a.contains(&p) || !b.contains(&-p) {
                    return None;
                }
                let mut r: BTreeSet<i64> = a.iter().copied().filter(|&l| l != p).collect();
                r.extend(b.iter().copied().filter(|&l| l != -p));
                if r != d {
                    return None;
                }
                d
            }
            "W" => {
                let a = premise(toks.get(2)?)?;
                let l: i64 = toks.get(3)?.parse().ok()?;
                if l == 0 || l.abs() > e.n {
                    return None;
                }
                let d: BTreeSet<i64> = lits(&toks[4..])?.into_iter().collect();
                if !in_range(&d) {
                    return None;
                }
                let mut r = a.clone();
                r.insert(l);
                if r != d {
                    return None;
                }
                d
            }
            _ => return None,
        };
        by_id.insert(id, derived.len());
        derived.push(clause);
    }
    if header? != derived.len() {
        return None;
    }
    if targets.is_empty() {
        derived.last().filter(|c| c.is_empty())?;
    } else if !targets.iter().all(|t| derived.contains(t)) {
        return None;
    }
    Some(())
}
