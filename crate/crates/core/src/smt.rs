//! Lazy DPLL(T): the CDCL engine enumerates Boolean assignments, the theory
//! solver checks them incrementally, and every theory lemma handed back to
//! the engine is kept in a [`TLemmaStore`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ir::{Context, Formula, Literal, Logic};
use crate::sat::{self, ClauseRef, ClauseSource, Lit, ProofLog, SatVerdict, Solver, SolverConfig, TheoryLemma};
use crate::theory::{new_solver, Mark, TheorySolver, TheoryVerdict, Witness};

/// Search options.
#[derive(Clone, Debug)]
pub struct SmtOptions {
    /// Assert theory literals and check consistency at every propagation
    /// fixpoint, not only on complete assignments.
    pub early_pruning: bool,
    /// Turn theory deductions into clauses. Needs early pruning.
    pub theory_propagation: bool,
    pub conflict_budget: Option<u64>,
    pub seed: Option<u64>,
    pub log_proof: bool,
}

impl Default for SmtOptions {
    fn default() -> Self {
        SmtOptions { early_pruning: true, theory_propagation: true, conflict_budget: None, seed: None, log_proof: false }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum TLemmaKind {
    /// Negation of a theory-inconsistent set of asserted literals.
    Conflict,
    /// `explanation -> literal`, as a clause.
    Deduction,
}

/// A theory-valid clause produced during search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TLemma {
    pub lits: Vec<Literal>,
    pub kind: TLemmaKind,
    /// Position in the store.
    pub seq: usize,
}

/// Theory lemmas of a run in discovery order, each stored once.
#[derive(Clone, Debug, Default)]
pub struct TLemmaStore {
    lemmas: Vec<TLemma>,
    index: HashMap<Vec<Literal>, usize>,
}

impl TLemmaStore {
    pub fn new() -> TLemmaStore {
        TLemmaStore::default()
    }

    /// Stores a lemma unless an equal clause is already present; returns
    /// its sequence number either way.
    pub fn insert(&mut self, lits: Vec<Literal>, kind: TLemmaKind) -> usize {
        let mut key = lits;
        key.sort_unstable();
        key.dedup();
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let seq = self.lemmas.len();
        self.index.insert(key.clone(), seq);
        self.lemmas.push(TLemma { lits: key, kind, seq });
        seq
    }

    pub fn get(&self, i: usize) -> &TLemma {
        &self.lemmas[i]
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TLemma> {
        self.lemmas.iter()
    }

    pub fn clauses(&self) -> Vec<Vec<Literal>> {
        self.lemmas.iter().map(|l| l.lits.clone()).collect()
    }
}

/// A theory model together with the values of the propositional atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtModel {
    pub witness: Witness,
    /// Value of every atom, indexed by atom id, as assigned by the Boolean
    /// engine.
    pub atoms: Vec<bool>,
    /// Values of the variables created with [`SmtSolver::new_var`], in
    /// creation order.
    pub extra: Vec<bool>,
}

impl SmtModel {
    /// Theory atoms are evaluated in the witness, propositional ones by
    /// their assigned value.
    pub fn eval(&self, ctx: &Context, l: Literal) -> bool {
        let v = match self.witness.eval_atom(ctx.atoms.get(l.atom)) {
            Some(v) => v,
            None => self.atoms.get(l.atom.0 as usize).copied().unwrap_or(false),
        };
        v == l.positive
    }

    pub fn satisfies(&self, ctx: &Context, clause: &[Literal]) -> bool {
        clause.iter().any(|l| self.eval(ctx, *l))
    }

    /// Value of a Boolean engine literal, atom or extra variable.
    pub fn lit_value(&self, l: Lit) -> bool {
        let i = l.var().index();
        let v = if i < self.atoms.len() { self.atoms[i] } else { self.extra.get(i - self.atoms.len()).copied().unwrap_or(false) };
        v == l.is_positive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmtVerdict {
    Sat(SmtModel),
    Unsat,
    /// Unsatisfiable under the given assumptions; negations of the
    /// assumptions responsible.
    UnsatAssumptions(Vec<Lit>),
    /// The conflict budget ran out.
    Unknown,
}

impl SmtVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SmtVerdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SmtVerdict::Unsat | SmtVerdict::UnsatAssumptions(_))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SmtStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub theory_checks: u64,
    pub theory_conflicts: u64,
    pub theory_deductions: u64,
}

/// Connects the Boolean engine to a theory solver for one `solve` call.
struct Bridge<'a> {
    ctx: &'a Context,
    th: &'a mut dyn TheorySolver,
    store: &'a mut TLemmaStore,
    stats: &'a mut SmtStats,
    opts: &'a SmtOptions,
    /// Length of the trail prefix already asserted in the theory.
    asserted: usize,
    /// Per decision level: asserted prefix and theory mark when it opened.
    marks: Vec<(usize, Mark)>,
    witness: Option<Witness>,
}

impl Bridge<'_> {
    fn lemma(&mut self, lits: Vec<Literal>, kind: TLemmaKind) -> TheoryLemma {
        let tag = self.store.insert(lits, kind);
        TheoryLemma { lits: self.ctx.t2p(&self.store.get(tag).lits), tag }
    }

    fn conflict(&mut self, c: Vec<Literal>) -> Vec<TheoryLemma> {
        self.stats.theory_conflicts += 1;
        let lits = c.into_iter().map(|l| !l).collect();
        vec![self.lemma(lits, TLemmaKind::Conflict)]
    }
}

impl sat::Theory for Bridge<'_> {
    fn early_pruning(&self) -> bool {
        self.opts.early_pruning
    }

    fn new_level(&mut self) {
        let m = self.th.mark();
        self.marks.push((self.asserted, m));
    }

    fn backtrack(&mut self, level: usize) {
        if let Some(&(n, m)) = self.marks.get(level) {
            self.th.backtrack(m).expect("bridge marks are live");
            self.asserted = n;
            self.marks.truncate(level);
        }
    }

    fn check(&mut self, trail: &[Lit], complete: bool) -> Vec<TheoryLemma> {
        self.stats.theory_checks += 1;
        let num_atoms = self.ctx.atoms.len();
        while self.asserted < trail.len() {
            let l = trail[self.asserted];
            self.asserted += 1;
            if l.var().index() >= num_atoms {
                continue;
            }
            let lit = Literal::from_lit(l);
            if !self.ctx.atoms.get(lit.atom).is_theory() {
                continue;
            }
            if let Some(c) = self.th.assert_literal(self.ctx, lit).expect("atoms are registered when clauses are added") {
                return self.conflict(c);
            }
        }
        if complete {
            return match self.th.check_full() {
                TheoryVerdict::Conflict(c) => self.conflict(c),
                TheoryVerdict::Sat(w) => {
                    self.witness = Some(w);
                    Vec::new()
                }
            };
        }
        if let Some(c) = self.th.check() {
            return self.conflict(c);
        }
        if !self.opts.theory_propagation {
            return Vec::new();
        }
        let mut out = Vec::new();
        for d in self.th.deductions() {
            self.stats.theory_deductions += 1;
            let mut lits: Vec<Literal> = d.explanation.into_iter().map(|l| !l).collect();
            lits.push(d.lit);
            out.push(self.lemma(lits, TLemmaKind::Deduction));
        }
        out
    }
}

/// An incremental SMT solver over a fixed context.
///
/// Boolean variable `i` is atom `i` of the context; variables past the atom
/// table (from [`SmtSolver::new_var`]) are free selectors.
pub struct SmtSolver<'a> {
    ctx: &'a Context,
    sat: Solver,
    theory: Box<dyn TheorySolver>,
    base: Mark,
    store: TLemmaStore,
    opts: SmtOptions,
    stats: SmtStats,
}

impl<'a> SmtSolver<'a> {
    pub fn new(ctx: &'a Context, logic: Logic, opts: SmtOptions) -> SmtSolver<'a> {
        let cfg = SolverConfig {
            conflict_budget: opts.conflict_budget,
            log_proof: opts.log_proof,
            seed: opts.seed,
            ..SolverConfig::default()
        };
        let mut sat = Solver::new(cfg);
        sat.reserve_vars(ctx.atoms.len());
        let mut theory = new_solver(logic);
        let base = theory.mark();
        SmtSolver { ctx, sat, theory, base, store: TLemmaStore::new(), opts, stats: SmtStats::default() }
    }

    /// A solver loaded with every clause of `formula`; clause `i` is input
    /// `i` of the Boolean engine.
    pub fn for_formula(formula: &'a Formula, opts: SmtOptions) -> Result<SmtSolver<'a>> {
        let mut s = SmtSolver::new(&formula.ctx, formula.logic(), opts);
        for c in formula.clauses() {
            s.add_clause(c.lits(), &[])?;
        }
        Ok(s)
    }

    pub fn ctx(&self) -> &'a Context {
        self.ctx
    }

    /// A fresh Boolean variable outside the atom table.
    pub fn new_var(&mut self) -> Lit {
        Lit::new(self.sat.new_var(), true)
    }

    /// Adds `lits` plus extra Boolean literals (such as a negated selector)
    /// as an input clause of the Boolean engine.
    pub fn add_clause(&mut self, lits: &[Literal], extra: &[Lit]) -> Result<ClauseRef> {
        for l in lits {
            if l.atom.0 as usize >= self.ctx.atoms.len() {
                return Err(Error::UnknownVariable(l.atom.0 + 1));
            }
            if self.ctx.atoms.get(l.atom).is_theory() {
                self.theory.register_atom(self.ctx, l.atom)?;
            }
        }
        for l in extra {
            if l.var().index() < self.ctx.atoms.len() {
                return Err(Error::Precondition(format!("extra literal {} is an atom variable", l.to_dimacs())));
            }
        }
        let mut c = self.ctx.t2p(lits);
        c.extend_from_slice(extra);
        Ok(self.sat.add_clause(&c))
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SmtVerdict> {
        self.theory.backtrack(self.base)?;
        self.base = self.theory.mark();
        let mut bridge = Bridge {
            ctx: self.ctx,
            th: self.theory.as_mut(),
            store: &mut self.store,
            stats: &mut self.stats,
            opts: &self.opts,
            asserted: 0,
            marks: Vec::new(),
            witness: None,
        };
        let verdict = self.sat.solve_with(assumptions, &mut bridge);
        let witness = bridge.witness.take();
        self.stats.conflicts = self.sat.stats().conflicts;
        self.stats.decisions = self.sat.stats().decisions;
        Ok(match verdict {
            SatVerdict::Sat(model) => {
                let n = self.ctx.atoms.len();
                let mut atoms = model;
                let extra = if atoms.len() > n { atoms.split_off(n) } else { Vec::new() };
                atoms.resize(n, false);
                SmtVerdict::Sat(SmtModel { witness: witness.unwrap_or_default(), atoms, extra })
            }
            SatVerdict::Unsat => SmtVerdict::Unsat,
            SatVerdict::UnsatAssumptions(c) => SmtVerdict::UnsatAssumptions(c),
            SatVerdict::Unknown => SmtVerdict::Unknown,
        })
    }

    pub fn lemmas(&self) -> &TLemmaStore {
        &self.store
    }

    pub fn into_lemmas(self) -> TLemmaStore {
        self.store
    }

    pub fn stats(&self) -> &SmtStats {
        &self.stats
    }

    pub fn sat(&self) -> &Solver {
        &self.sat
    }

    pub fn proof(&self) -> Option<&ProofLog> {
        self.sat.proof()
    }

    /// Input clause numbers and lemma sequence numbers used by the logged
    /// refutation.
    pub fn proof_leaves(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let proof = self.sat.proof().ok_or_else(|| Error::Precondition("no proof was logged".into()))?;
        let mut inputs = Vec::new();
        let mut lemmas = Vec::new();
        for cr in sat::proof_core(proof)? {
            match self.sat.clause_source(cr) {
                ClauseSource::Input(i) => inputs.push(i),
                ClauseSource::Theory(t) => lemmas.push(t),
                ClauseSource::Learned => {
                    return Err(Error::Proof { node: cr, msg: "learned clause used as a leaf".into() })
                }
            }
        }
        inputs.sort_unstable();
        lemmas.sort_unstable();
        Ok((inputs, lemmas))
    }
}

/// Result of [`smt_solve`].
#[derive(Clone, Debug)]
pub struct SmtRun {
    pub verdict: SmtVerdict,
    pub lemmas: TLemmaStore,
    pub stats: SmtStats,
}

/// Decides `formula`, returning the verdict and every lemma the search
/// produced. An exhausted budget yields [`SmtVerdict::Unknown`] with the
/// lemmas found so far.
///
/// ```
/// use lemlift::frontend::load;
/// use lemlift::smt::{smt_solve, SmtOptions};
///
/// let f = load("(declare-fun x () Real) (assert (= x 1)) (assert (= x 0))").unwrap();
/// let run = smt_solve(&f, &SmtOptions::default()).unwrap();
/// assert!(run.verdict.is_unsat());
/// assert_eq!(run.lemmas.len(), 1);
/// ```
pub fn smt_solve(formula: &Formula, opts: &SmtOptions) -> Result<SmtRun> {
    let mut s = SmtSolver::for_formula(formula, opts.clone())?;
    let verdict = s.solve(&[])?;
    if let SmtVerdict::Sat(m) = &verdict {
        debug_assert!(formula.clauses().iter().all(|c| m.satisfies(&formula.ctx, c.lits())));
    }
    let stats = s.stats().clone();
    Ok(SmtRun { verdict, lemmas: s.into_lemmas(), stats })
}

/// Theory satisfiability of the clauses of `formula` at `indices`.
pub fn is_satisfiable(formula: &Formula, indices: &[usize], opts: &SmtOptions) -> Result<bool> {
    let mut s = SmtSolver::new(&formula.ctx, formula.logic(), SmtOptions { log_proof: false, ..opts.clone() });
    for &i in indices {
        s.add_clause(formula.clause(i).lits(), &[])?;
    }
    match s.solve(&[])? {
        SmtVerdict::Sat(_) => Ok(true),
        SmtVerdict::Unknown => Err(Error::Budget),
        _ => Ok(false),
    }
}
