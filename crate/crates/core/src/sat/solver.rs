use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::heap::VarHeap;
use super::proof::{NodeId, ProofLog};
use super::types::{LBool, Lit, Var};

/// Search parameters. The defaults are deterministic: no randomness, ties in
/// the branching order go to the lowest variable index.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub var_decay: f64,
    /// Geometric restarts. `None` means "on unless logging a proof".
    pub restarts: Option<bool>,
    pub restart_first: u64,
    pub restart_factor: f64,
    /// Local minimization of learned clauses, with the extra resolutions
    /// recorded in the proof.
    pub minimize: bool,
    pub conflict_budget: Option<u64>,
    pub log_proof: bool,
    /// Perturbs the initial branching order and phases. `None` keeps the
    /// deterministic lowest-index order.
    pub seed: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            var_decay: 0.95,
            restarts: None,
            restart_first: 100,
            restart_factor: 1.5,
            minimize: false,
            conflict_budget: None,
            log_proof: false,
            seed: None,
        }
    }
}

/// Who added a clause to the database.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClauseSource {
    /// The n-th clause given through [`Solver::add_clause`].
    Input(usize),
    /// A clause supplied by a [`Theory`] during search, with its tag.
    Theory(usize),
    Learned,
}

pub type ClauseRef = usize;

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    source: ClauseSource,
    activity: f64,
    deleted: bool,
    node: Option<NodeId>,
}

/// A clause handed to the solver by a theory: a conflict clause (all
/// literals false) or a deduction clause (one literal unassigned, the rest
/// false).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryLemma {
    pub lits: Vec<Lit>,
    pub tag: usize,
}

/// Callback interface used to run the solver as the Boolean engine of a
/// lazy SMT procedure.
pub trait Theory {
    /// Whether to call [`Theory::check`] on partial assignments.
    fn early_pruning(&self) -> bool;
    /// A new decision level is about to be opened.
    fn new_level(&mut self);
    /// The trail was cut back to `level`.
    fn backtrack(&mut self, level: usize);
    /// Examines the trail at a propagation fixpoint. `complete` is set when
    /// every relevant variable is assigned. An empty result means the
    /// assignment is theory-consistent as far as the theory can tell.
    fn check(&mut self, trail: &[Lit], complete: bool) -> Vec<TheoryLemma>;
}

/// Placeholder theory for pure SAT solving.
pub struct NoTheory;

impl Theory for NoTheory {
    fn early_pruning(&self) -> bool {
        false
    }
    fn new_level(&mut self) {}
    fn backtrack(&mut self, _level: usize) {}
    fn check(&mut self, _trail: &[Lit], _complete: bool) -> Vec<TheoryLemma> {
        Vec::new()
    }
}

/// Outcome of a solver call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    /// A model indexed by variable. Variables that occur in no clause are
    /// reported false.
    Sat(Vec<bool>),
    /// The clause set is unsatisfiable. With proof logging the proof is
    /// available from [`Solver::proof`].
    Unsat,
    /// Unsatisfiable under the given assumptions; the clause contains only
    /// negations of assumption literals.
    UnsatAssumptions(Vec<Lit>),
    /// The conflict budget ran out.
    Unknown,
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatVerdict::Unsat | SatVerdict::UnsatAssumptions(_))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub theory_lemmas: u64,
    pub restarts: u64,
}

enum Added {
    Ok,
    Conflict(ClauseRef),
}

/// CDCL solver with two watched literals, activity-based branching, 1st-UIP
/// learning, assumptions, and optional resolution-proof logging.
pub struct Solver {
    cfg: SolverConfig,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<ClauseRef>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    polarity: Vec<bool>,
    relevant: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    heap: VarHeap,
    var_inc: f64,
    cla_inc: f64,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    ok: bool,
    inputs: usize,
    theory_index: HashMap<Vec<Lit>, ClauseRef>,
    proof: Option<ProofLog>,
    unit_node: Vec<Option<NodeId>>,
    max_learnts: f64,
    stats: SolverStats,
    rng: Option<StdRng>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Solver {
        let proof = cfg.log_proof.then(ProofLog::new);
        let rng = cfg.seed.map(StdRng::seed_from_u64);
        Solver {
            cfg,
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            relevant: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            heap: VarHeap::default(),
            var_inc: 1.0,
            cla_inc: 1.0,
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            ok: true,
            inputs: 0,
            theory_index: HashMap::new(),
            proof,
            unit_node: Vec::new(),
            max_learnts: 0.0,
            stats: SolverStats::default(),
            rng,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// Makes sure variables `0..n` exist.
    pub fn reserve_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.assigns.push(LBool::Undef);
            self.level.push(0);
            self.reason.push(None);
            let (phase, act) = match self.rng.as_mut() {
                Some(r) => (r.gen_bool(0.5), r.gen_range(0.0..1e-3)),
                None => (false, 0.0),
            };
            self.polarity.push(phase);
            self.relevant.push(false);
            self.activity.push(act);
            self.seen.push(false);
            self.unit_node.push(None);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
        self.heap.grow(n);
    }

    /// Allocates a fresh variable.
    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.reserve_vars(v.index() + 1);
        v
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn proof(&self) -> Option<&ProofLog> {
        self.proof.as_ref()
    }

    pub fn take_proof(&mut self) -> Option<ProofLog> {
        self.proof.take()
    }

    pub fn clause_lits(&self, cr: ClauseRef) -> &[Lit] {
        &self.clauses[cr].lits
    }

    pub fn clause_source(&self, cr: ClauseRef) -> ClauseSource {
        self.clauses[cr].source
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Literals of every input and theory clause, indexed by clause id.
    /// Learned clauses are included too so that proof leaves can be looked
    /// up by id.
    pub fn all_clause_lits(&self) -> Vec<Vec<Lit>> {
        self.clauses.iter().map(|c| c.lits.clone()).collect()
    }

    /// Learned clauses that are still in the database.
    pub fn learned_clauses(&self) -> impl Iterator<Item = &[Lit]> {
        self.clauses
            .iter()
            .filter(|c| c.source == ClauseSource::Learned && !c.deleted)
            .map(|c| c.lits.as_slice())
    }

    #[inline]
    pub fn value_lit(&self, l: Lit) -> LBool {
        match self.assigns[l.var().index()] {
            LBool::Undef => LBool::Undef,
            v if (v == LBool::True) == l.is_positive() => LBool::True,
            _ => LBool::False,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn mark_relevant(&mut self, lits: &[Lit]) {
        let max = lits.iter().map(|l| l.var().index() + 1).max().unwrap_or(0);
        self.reserve_vars(max);
        for l in lits {
            let v = l.var().index();
            if !self.relevant[v] {
                self.relevant[v] = true;
                self.heap.insert(v as u32, &self.activity);
            }
        }
    }

    fn push_clause(&mut self, lits: Vec<Lit>, source: ClauseSource) -> ClauseRef {
        let cr = self.clauses.len();
        let node = self.proof.as_mut().map(|p| p.add_leaf(cr, &lits));
        let node = match source {
            ClauseSource::Learned => None,
            _ => node,
        };
        self.clauses.push(ClauseData { lits, source, activity: 0.0, deleted: false, node });
        cr
    }

    fn watch(&mut self, cr: ClauseRef) {
        let c = &self.clauses[cr].lits;
        debug_assert!(c.len() >= 2);
        let (a, b) = (c[0], c[1]);
        self.watches[a.code()].push(cr);
        self.watches[b.code()].push(cr);
    }

    /// Adds an input clause. Returns its id; ids are dense and start at 0.
    pub fn add_clause(&mut self, lits: &[Lit]) -> ClauseRef {
        let mut theory = NoTheory;
        self.cancel_until(0, &mut theory);
        let mut lits = lits.to_vec();
        lits.sort_unstable();
        lits.dedup();
        self.mark_relevant(&lits);
        let source = ClauseSource::Input(self.inputs);
        self.inputs += 1;
        let tautology = lits.windows(2).any(|w| w[0].var() == w[1].var());
        let cr = self.push_clause(lits, source);
        if !self.ok || tautology {
            return cr;
        }
        match self.attach(cr, &mut theory, false) {
            Added::Ok => {}
            Added::Conflict(c) => self.derive_empty(c),
        }
        cr
    }

    /// Places a clause added outside conflict analysis: orders the literals
    /// so that the watches are the best candidates, then watches and/or
    /// enqueues as the current assignment dictates.
    fn attach(&mut self, cr: ClauseRef, theory: &mut dyn Theory, quiet: bool) -> Added {
        let mut lits = std::mem::take(&mut self.clauses[cr].lits);
        let rank = |s: &Solver, l: Lit| -> (u8, std::cmp::Reverse<u32>) {
            match s.value_lit(l) {
                LBool::True => (0, std::cmp::Reverse(0)),
                LBool::Undef => (1, std::cmp::Reverse(0)),
                LBool::False => (2, std::cmp::Reverse(s.level[l.var().index()])),
            }
        };
        lits.sort_by_key(|l| rank(self, *l));
        self.clauses[cr].lits = lits;
        let c = &self.clauses[cr].lits;
        if c.is_empty() {
            return Added::Conflict(cr);
        }
        let first = self.value_lit(c[0]);
        let second = c.get(1).map(|l| self.value_lit(*l));
        if c.len() >= 2 {
            self.watch(cr);
        }
        match (first, second) {
            (LBool::False, _) => Added::Conflict(cr),
            (LBool::Undef, None | Some(LBool::False)) if !quiet => {
                let l = self.clauses[cr].lits[0];
                if self.clauses[cr].lits.len() == 1 && self.decision_level() > 0 {
                    self.cancel_until(0, theory);
                }
                self.enqueue(l, Some(cr));
                Added::Ok
            }
            _ => Added::Ok,
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = LBool::from_bool(l.is_positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
        if self.decision_level() == 0 {
            if let (Some(cr), Some(_)) = (reason, self.proof.as_ref()) {
                let node = self.resolve_level0(cr, Some(l.var()));
                self.unit_node[v] = Some(node);
            }
        }
    }

    /// Resolves the proof node of `cr` with the unit derivations of all its
    /// level-0 false literals (other than `keep`).
    fn resolve_level0(&mut self, cr: ClauseRef, keep: Option<Var>) -> NodeId {
        let mut node = self.clauses[cr].node.expect("proof node for clause");
        let others: Vec<Var> =
            self.clauses[cr].lits.iter().map(|l| l.var()).filter(|v| Some(*v) != keep).collect();
        for v in others {
            let unit = self.unit_node[v.index()].expect("unit derivation for level-0 literal");
            node = self.proof.as_mut().expect("proof").add_resolvent(node, unit, v);
        }
        node
    }

    fn derive_empty(&mut self, cr: ClauseRef) {
        self.ok = false;
        if self.proof.is_some() {
            let node = self.resolve_level0(cr, None);
            self.proof.as_mut().expect("proof").set_root(node);
        }
    }

    fn cancel_until(&mut self, level: usize, theory: &mut dyn Theory) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.polarity[v] = l.is_positive();
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level);
        self.qhead = lim;
        theory.backtrack(level);
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let cr = ws[i];
                i += 1;
                if self.clauses[cr].deleted {
                    continue;
                }
                {
                    let c = &mut self.clauses[cr].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cr].lits[0];
                if self.value_lit(first) == LBool::True {
                    kept.push(cr);
                    continue;
                }
                let len = self.clauses[cr].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cr].lits[k];
                    if self.value_lit(l) != LBool::False {
                        self.clauses[cr].lits.swap(1, k);
                        self.watches[l.code()].push(cr);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(cr);
                if self.value_lit(first) == LBool::False {
                    conflict = Some(cr);
                    kept.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Some(cr));
            }
            let slot = &mut self.watches[false_lit.code()];
            kept.append(slot);
            *slot = kept;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: Var) {
        let a = &mut self.activity[v.index()];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v.0, &self.activity);
    }

    fn bump_clause(&mut self, cr: ClauseRef) {
        if self.clauses[cr].source != ClauseSource::Learned {
            return;
        }
        self.clauses[cr].activity += self.cla_inc;
        if self.clauses[cr].activity > 1e20 {
            for c in self.clauses.iter_mut() {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// 1st-UIP analysis. Returns the learned clause (asserting literal
    /// first, then the literal with the highest remaining level), its
    /// backjump level, and its proof node when logging.
    fn analyze(&mut self, confl: ClauseRef) -> (Vec<Lit>, usize, Option<NodeId>) {
        let current = self.decision_level() as u32;
        let mut out: Vec<Lit> = vec![Lit::new(Var(0), true)];
        let mut level0: Vec<Var> = Vec::new();
        let mut path = 0usize;
        let mut idx = self.trail.len();
        let mut cr = confl;
        let mut p: Option<Lit> = None;
        let logging = self.proof.is_some();
        let mut node = if logging { self.clauses[cr].node } else { None };
        let mut seen0 = vec![];

        loop {
            self.bump_clause(cr);
            let lits = self.clauses[cr].lits.clone();
            for q in lits {
                if Some(q) == p {
                    continue;
                }
                let v = q.var();
                if self.seen[v.index()] {
                    continue;
                }
                if self.level[v.index()] == 0 {
                    if logging {
                        self.seen[v.index()] = true;
                        seen0.push(v);
                        level0.push(v);
                    }
                    continue;
                }
                self.seen[v.index()] = true;
                self.bump_var(v);
                if self.level[v.index()] >= current {
                    path += 1;
                } else {
                    out.push(q);
                }
            }
            loop {
                idx -= 1;
                let v = self.trail[idx].var();
                if self.seen[v.index()] && self.level[v.index()] > 0 {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var().index()] = false;
            p = Some(lit);
            path -= 1;
            if path == 0 {
                break;
            }
            cr = self.reason[lit.var().index()].expect("implied literal has a reason");
            if logging {
                let r = self.clauses[cr].node.expect("node");
                node = Some(self.proof.as_mut().expect("proof").add_resolvent(node.expect("node"), r, lit.var()));
            }
        }
        let uip = p.expect("UIP");
        out[0] = !uip;

        if self.cfg.minimize {
            let mut i = 1;
            while i < out.len() {
                let q = out[i];
                let removable = match self.reason[q.var().index()] {
                    None => false,
                    Some(r) => self.clauses[r].lits.iter().all(|l| {
                        l.var() == q.var() || self.seen[l.var().index()] || self.level[l.var().index()] == 0
                    }),
                };
                if !removable {
                    i += 1;
                    continue;
                }
                let r = self.reason[q.var().index()].expect("reason");
                if logging {
                    let rn = self.clauses[r].node.expect("node");
                    node = Some(self.proof.as_mut().expect("proof").add_resolvent(node.expect("node"), rn, q.var()));
                    for l in self.clauses[r].lits.clone() {
                        let v = l.var();
                        if self.level[v.index()] == 0 && !self.seen[v.index()] {
                            self.seen[v.index()] = true;
                            seen0.push(v);
                            level0.push(v);
                        }
                    }
                }
                self.seen[q.var().index()] = false;
                out.swap_remove(i);
            }
        }

        if logging {
            let mut n = node.expect("node");
            for v in level0 {
                let unit = self.unit_node[v.index()].expect("unit node");
                n = self.proof.as_mut().expect("proof").add_resolvent(n, unit, v);
            }
            node = Some(n);
        }
        for v in seen0 {
            self.seen[v.index()] = false;
        }
        for l in &out[1..] {
            self.seen[l.var().index()] = false;
        }

        let mut bt = 0;
        if out.len() > 1 {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.level[out[i].var().index()] > self.level[out[max_i].var().index()] {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            bt = self.level[out[1].var().index()] as usize;
        }
        if let (Some(n), Some(proof)) = (node, self.proof.as_ref()) {
            debug_assert_eq!(
                {
                    let mut s = out.clone();
                    s.sort_unstable();
                    s
                },
                proof.node(n).lits().to_vec(),
                "proof-derived clause differs from the learned clause"
            );
        }
        (out, bt, node)
    }

    /// Collects the assumptions responsible for `p` being false.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut out = vec![!p];
        if self.decision_level() == 0 || self.level[p.var().index()] == 0 {
            return out;
        }
        self.seen[p.var().index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[i];
            let v = x.var().index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if !out.contains(&!x) {
                        out.push(!x);
                    }
                }
                Some(r) => {
                    for l in self.clauses[r].lits.clone() {
                        if l.var().index() != v && self.level[l.var().index()] > 0 {
                            self.seen[l.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var().index()] = false;
        out
    }

    /// Handles a falsified clause: backjumps to its highest level, learns,
    /// and asserts. Returns false when the empty clause was derived.
    fn resolve_conflict(&mut self, confl: ClauseRef, theory: &mut dyn Theory) -> bool {
        self.stats.conflicts += 1;
        let max_level =
            self.clauses[confl].lits.iter().map(|l| self.level[l.var().index()]).max().unwrap_or(0) as usize;
        if max_level == 0 {
            self.derive_empty(confl);
            return false;
        }
        if max_level < self.decision_level() {
            self.cancel_until(max_level, theory);
        }
        let (learnt, bt, node) = self.analyze(confl);
        self.cancel_until(bt, theory);
        let asserting = learnt[0];
        let cr = self.clauses.len();
        let len = learnt.len();
        self.clauses.push(ClauseData {
            lits: learnt,
            source: ClauseSource::Learned,
            activity: 0.0,
            deleted: false,
            node,
        });
        self.bump_clause(cr);
        if len >= 2 {
            self.watch(cr);
        }
        self.enqueue(asserting, Some(cr));
        self.var_inc /= self.cfg.var_decay;
        self.cla_inc /= 0.999;
        true
    }

    fn add_theory_lemmas(&mut self, lemmas: Vec<TheoryLemma>, theory: &mut dyn Theory) -> Option<ClauseRef> {
        let mut conflict = None;
        for lemma in lemmas {
            self.stats.theory_lemmas += 1;
            let mut key = lemma.lits.clone();
            key.sort_unstable();
            key.dedup();
            self.mark_relevant(&key);
            let cr = match self.theory_index.get(&key) {
                Some(&cr) => cr,
                None => {
                    let cr = self.push_clause(key.clone(), ClauseSource::Theory(lemma.tag));
                    self.theory_index.insert(key, cr);
                    match self.attach(cr, theory, conflict.is_some()) {
                        Added::Conflict(c) => {
                            conflict.get_or_insert(c);
                        }
                        Added::Ok => {}
                    }
                    continue;
                }
            };
            // Already in the database: re-evaluate without re-watching.
            let lits = self.clauses[cr].lits.clone();
            let open: Vec<Lit> = lits.iter().copied().filter(|l| self.value_lit(*l) != LBool::False).collect();
            match open.as_slice() {
                [] => {
                    conflict.get_or_insert(cr);
                }
                [l] if conflict.is_none() && self.value_lit(*l) == LBool::Undef => self.enqueue(*l, Some(cr)),
                _ => {}
            }
        }
        conflict
    }

    fn reduce_db(&mut self) {
        let mut cand: Vec<ClauseRef> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.source == ClauseSource::Learned && !c.deleted && c.lits.len() > 2
            })
            .collect();
        cand.sort_by(|a, b| self.clauses[*a].activity.total_cmp(&self.clauses[*b].activity).then(a.cmp(b)));
        let half = cand.len() / 2;
        for &cr in &cand[..half] {
            let first = self.clauses[cr].lits[0];
            let locked = self.value_lit(first) == LBool::True && self.reason[first.var().index()] == Some(cr);
            if !locked {
                self.clauses[cr].deleted = true;
            }
        }
    }

    fn num_learnts(&self) -> usize {
        self.clauses.iter().filter(|c| c.source == ClauseSource::Learned && !c.deleted).count()
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            let v = v as usize;
            if self.assigns[v] == LBool::Undef && self.relevant[v] {
                return Some(Lit::new(Var(v as u32), self.polarity[v]));
            }
        }
        None
    }

    fn all_assigned(&self) -> bool {
        self.assigns.iter().zip(&self.relevant).all(|(a, r)| !r || *a != LBool::Undef)
    }

    fn model(&self) -> Vec<bool> {
        self.assigns.iter().map(|a| *a == LBool::True).collect()
    }

    /// Solves the clause set.
    pub fn solve(&mut self) -> SatVerdict {
        self.solve_with(&[], &mut NoTheory)
    }

    pub fn solve_assuming(&mut self, assumptions: &[Lit]) -> SatVerdict {
        self.solve_with(assumptions, &mut NoTheory)
    }

    /// Solves under `assumptions`, consulting `theory` at propagation
    /// fixpoints. On `Sat` the trail is left in place so that the theory
    /// state still describes the model.
    pub fn solve_with(&mut self, assumptions: &[Lit], theory: &mut dyn Theory) -> SatVerdict {
        self.cancel_until(0, theory);
        theory.backtrack(0);
        if !self.ok {
            return SatVerdict::Unsat;
        }
        let max = assumptions.iter().map(|l| l.var().index() + 1).max().unwrap_or(0);
        self.reserve_vars(max);
        for a in assumptions {
            let v = a.var().index();
            if !self.relevant[v] {
                self.relevant[v] = true;
                self.heap.insert(v as u32, &self.activity);
            }
        }
        let restarts = self.cfg.restarts.unwrap_or(!self.cfg.log_proof);
        let mut restart_limit = self.cfg.restart_first as f64;
        let mut since_restart = 0u64;
        let start_conflicts = self.stats.conflicts;
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }

        loop {
            if let Some(confl) = self.propagate() {
                since_restart += 1;
                if !self.resolve_conflict(confl, theory) {
                    return SatVerdict::Unsat;
                }
                continue;
            }

            let complete = self.all_assigned();
            if complete || theory.early_pruning() {
                let lemmas = theory.check(&self.trail, complete);
                if !lemmas.is_empty() {
                    if let Some(confl) = self.add_theory_lemmas(lemmas, theory) {
                        since_restart += 1;
                        if !self.resolve_conflict(confl, theory) {
                            return SatVerdict::Unsat;
                        }
                    }
                    continue;
                }
            }

            if let Some(budget) = self.cfg.conflict_budget {
                if self.stats.conflicts - start_conflicts >= budget {
                    self.cancel_until(0, theory);
                    return SatVerdict::Unknown;
                }
            }
            if restarts && since_restart as f64 >= restart_limit {
                since_restart = 0;
                restart_limit *= self.cfg.restart_factor;
                self.stats.restarts += 1;
                self.cancel_until(0, theory);
                continue;
            }
            if self.num_learnts() as f64 >= self.max_learnts + self.trail.len() as f64 {
                self.reduce_db();
                self.max_learnts *= 1.1;
            }

            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value_lit(a) {
                    LBool::True => {
                        theory.new_level();
                        self.trail_lim.push(self.trail.len());
                    }
                    LBool::False => {
                        let clause = self.analyze_final(a);
                        return SatVerdict::UnsatAssumptions(clause);
                    }
                    LBool::Undef => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => {
                        self.stats.decisions += 1;
                        l
                    }
                    None => return SatVerdict::Sat(self.model()),
                },
            };
            theory.new_level();
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }

    /// The current assignment, in assignment order.
    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }
}
