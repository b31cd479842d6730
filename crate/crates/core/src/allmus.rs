//! All minimal unsatisfiable cores in two phases: enumerate every minimal
//! correction subset, then take the minimal hitting sets of that family.

use crate::error::{Error, Result};
use crate::ir::Formula;
use crate::sat::Lit;
use crate::smt::{SmtOptions, SmtSolver, SmtVerdict};

#[derive(Clone, Debug)]
pub struct AllMusOptions {
    pub max_mcs: usize,
    pub max_mus: usize,
    pub smt: SmtOptions,
}

impl Default for AllMusOptions {
    fn default() -> Self {
        AllMusOptions { max_mcs: 10_000, max_mus: 10_000, smt: SmtOptions::default() }
    }
}

/// Minimal correction subsets of a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McsSet {
    /// Each set sorted, the family sorted lexicographically.
    pub sets: Vec<Vec<usize>>,
    pub num_clauses: usize,
    /// The whole formula is satisfiable (and `sets` is empty).
    pub sat: bool,
    /// False when a cap or the conflict budget cut enumeration short.
    pub complete: bool,
}

impl McsSet {
    pub fn new(num_clauses: usize, mut sets: Vec<Vec<usize>>) -> McsSet {
        normalize(&mut sets);
        McsSet { sets, num_clauses, sat: false, complete: true }
    }
}

/// Minimal unsatisfiable cores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MusSet {
    pub sets: Vec<Vec<usize>>,
    pub complete: bool,
}

fn normalize(sets: &mut Vec<Vec<usize>>) {
    for s in sets.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    sets.sort();
    sets.dedup();
}

/// Sinz sequential counter over `xs`: returns `r` where `r[j]` is forced
/// true whenever more than `j` of `xs` are true. Only the upward
/// implications are encoded, which is all an at-most bound needs.
fn counter(s: &mut SmtSolver, xs: &[Lit]) -> Result<Vec<Lit>> {
    let n = xs.len();
    let mut prev: Vec<Lit> = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let cur: Vec<Lit> = (0..=i.min(n)).map(|_| s.new_var()).collect();
        s.add_clause(&[], &[!x, cur[0]])?;
        for j in 0..prev.len() {
            s.add_clause(&[], &[!prev[j], cur[j]])?;
            if j + 1 < cur.len() {
                s.add_clause(&[], &[!x, !prev[j], cur[j + 1]])?;
            }
        }
        prev = cur;
    }
    Ok(prev)
}

/// All minimal correction subsets, by increasing size.
///
/// Clause `i` is guarded by a selector; dropping a clause means making its
/// selector false. For `k = 0, 1, ..` every model with at most `k` dropped
/// clauses that avoids all blocked sets drops exactly a new MCS of size `k`.
pub fn enumerate_mcs(formula: &Formula, opts: &AllMusOptions) -> Result<McsSet> {
    let n = formula.len();
    let mut s = SmtSolver::new(&formula.ctx, formula.logic(), SmtOptions { log_proof: false, ..opts.smt.clone() });
    let sel: Vec<Lit> = (0..n).map(|_| s.new_var()).collect();
    for (c, &x) in formula.clauses().iter().zip(&sel) {
        s.add_clause(c.lits(), &[!x])?;
    }
    let dropped: Vec<Lit> = sel.iter().map(|&x| !x).collect();
    let at_least = counter(&mut s, &dropped)?;
    let mut out = McsSet { sets: Vec::new(), num_clauses: n, sat: false, complete: true };
    let mut k = 0;
    while k <= n {
        let bound: Vec<Lit> = at_least.get(k).map(|&r| vec![!r]).unwrap_or_default();
        match s.solve(&bound)? {
            SmtVerdict::Sat(m) => {
                if k == 0 {
                    out.sat = true;
                    return Ok(out);
                }
                let mcs: Vec<usize> = (0..n).filter(|&i| !m.lit_value(sel[i])).collect();
                debug_assert_eq!(mcs.len(), k);
                let block: Vec<Lit> = mcs.iter().map(|&i| sel[i]).collect();
                s.add_clause(&[], &block)?;
                log::debug!("mcs {:?}", mcs);
                out.sets.push(mcs);
                if out.sets.len() >= opts.max_mcs {
                    out.complete = false;
                    break;
                }
            }
            SmtVerdict::Unknown => {
                out.complete = false;
                break;
            }
            _ => match s.solve(&[])? {
                SmtVerdict::Sat(_) => k += 1,
                SmtVerdict::Unknown => {
                    out.complete = false;
                    break;
                }
                _ => break,
            },
        }
    }
    normalize(&mut out.sets);
    Ok(out)
}

/// Does `h` intersect every set of `m`?
pub fn hits_all(h: &[usize], m: &[Vec<usize>]) -> bool {
    m.iter().all(|s| s.iter().any(|e| h.contains(e)))
}

/// Whether no element of `h` can be removed while still hitting all of `m`.
pub fn is_minimal_hitting_set(h: &[usize], m: &[Vec<usize>]) -> bool {
    hits_all(h, m)
        && (0..h.len()).all(|i| {
            let rest: Vec<usize> = h.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &e)| e).collect();
            !hits_all(&rest, m)
        })
}

struct HsSearch<'a> {
    m: &'a [Vec<usize>],
    found: Vec<Vec<usize>>,
    cap: usize,
    truncated: bool,
}

impl HsSearch<'_> {
    fn run(&mut self, cur: &mut Vec<usize>, forbidden: &mut Vec<usize>) {
        if self.truncated {
            return;
        }
        if self.found.iter().any(|f| f.iter().all(|e| cur.contains(e))) {
            return;
        }
        // the unhit set with the fewest still-allowed elements
        let mut best: Option<Vec<usize>> = None;
        for s in self.m {
            if s.iter().any(|e| cur.contains(e)) {
                continue;
            }
            let allowed: Vec<usize> = s.iter().copied().filter(|e| !forbidden.contains(e)).collect();
            if best.as_ref().is_none_or(|b| allowed.len() < b.len()) {
                best = Some(allowed);
            }
        }
        let Some(branch) = best else {
            let mut h = cur.clone();
            h.sort_unstable();
            if is_minimal_hitting_set(&h, self.m) {
                if self.found.len() >= self.cap {
                    self.truncated = true;
                    return;
                }
                self.found.push(h);
            }
            return;
        };
        let depth = forbidden.len();
        for e in branch {
            cur.push(e);
            self.run(cur, forbidden);
            cur.pop();
            forbidden.push(e);
        }
        forbidden.truncate(depth);
    }
}

/// All minimal hitting sets of `m`, at most `cap` of them.
///
/// ```
/// use lemlift::allmus::{minimal_hitting_sets, McsSet};
///
/// let m = McsSet::new(3, vec![vec![0, 1], vec![1, 2]]);
/// assert_eq!(minimal_hitting_sets(&m, 100).sets, vec![vec![0, 2], vec![1]]);
/// ```
pub fn minimal_hitting_sets(m: &McsSet, cap: usize) -> MusSet {
    if m.sat {
        return MusSet { sets: Vec::new(), complete: m.complete };
    }
    let mut search = HsSearch { m: &m.sets, found: Vec::new(), cap, truncated: false };
    search.run(&mut Vec::new(), &mut Vec::new());
    let mut sets = search.found;
    normalize(&mut sets);
    MusSet { sets, complete: m.complete && !search.truncated }
}

/// One minimal hitting set: hit each set with its smallest element, then
/// drop elements from the highest down while everything stays hit.
pub fn single_mus(m: &McsSet) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for s in &m.sets {
        if !s.iter().any(|e| h.contains(e)) {
            if let Some(&e) = s.iter().min() {
                h.push(e);
            }
        }
    }
    h.sort_unstable();
    for i in (0..h.len()).rev() {
        let e = h.remove(i);
        if !hits_all(&h, &m.sets) {
            h.insert(i, e);
        }
    }
    h
}

/// Both phases. Fails with [`Error::Satisfiable`] on satisfiable input.
pub fn all_muses(formula: &Formula, opts: &AllMusOptions) -> Result<(McsSet, MusSet)> {
    let m = enumerate_mcs(formula, opts)?;
    if m.sat {
        return Err(Error::Satisfiable);
    }
    let u = minimal_hitting_sets(&m, opts.max_mus);
    Ok((m, u))
}
