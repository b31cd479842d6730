use std::collections::{BTreeMap, HashMap, HashSet};

use super::{dedup_lits, Deduction, Mark, TheorySolver, TheoryVerdict, Witness};
use crate::error::{Error, Result};
use crate::ir::{Atom, AtomId, Context, FunSym, Literal, TermId};

/// Why two nodes were merged.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Reason {
    Lit(Literal),
    /// Two applications of the same symbol with pairwise-equal arguments.
    Congruence(usize, usize),
}

#[derive(Clone, Debug)]
enum Undo {
    Union { child: usize, root: usize },
    Edge { node: usize, old: Option<(usize, Reason)> },
    Asserted(AtomId),
    Diseq,
}

#[derive(Clone, Debug)]
struct Node {
    term: TermId,
    fun: FunSym,
    args: Vec<usize>,
}

/// Congruence closure with a backtrackable union-find (union by size, no
/// path compression) and a proof forest for explanations.
#[derive(Clone, Debug, Default)]
pub struct EufSolver {
    nodes: Vec<Node>,
    node_of: HashMap<TermId, usize>,
    parent: Vec<usize>,
    size: Vec<usize>,
    /// Proof forest edge towards the node's proof root.
    edge: Vec<Option<(usize, Reason)>>,
    atoms: BTreeMap<AtomId, (usize, usize)>,
    asserted: Vec<Literal>,
    asserted_atoms: HashMap<AtomId, u32>,
    diseqs: Vec<(usize, usize, Literal)>,
    undo: Vec<Undo>,
    marks: Vec<usize>,
    /// Set when congruences may be missing (new terms, backtracking).
    dirty: bool,
}

impl EufSolver {
    pub fn new() -> EufSolver {
        EufSolver::default()
    }

    fn node(&mut self, ctx: &Context, t: TermId) -> usize {
        if let Some(&n) = self.node_of.get(&t) {
            return n;
        }
        let app = ctx.terms.app(t).clone();
        let args = app.args.iter().map(|a| self.node(ctx, *a)).collect();
        let n = self.nodes.len();
        self.nodes.push(Node { term: t, fun: app.fun, args });
        self.node_of.insert(t, n);
        self.parent.push(n);
        self.size.push(1);
        self.edge.push(None);
        self.dirty = true;
        n
    }

    fn find(&self, mut n: usize) -> usize {
        while self.parent[n] != n {
            n = self.parent[n];
        }
        n
    }

    fn reroot(&mut self, n: usize) {
        let mut prev: Option<(usize, Reason)> = None;
        let mut cur = n;
        loop {
            let next = self.edge[cur];
            self.undo.push(Undo::Edge { node: cur, old: next });
            self.edge[cur] = prev;
            match next {
                Some((m, r)) => {
                    prev = Some((cur, r));
                    cur = m;
                }
                None => break,
            }
        }
    }

    fn union(&mut self, a: usize, b: usize, reason: Reason) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        self.reroot(a);
        self.undo.push(Undo::Edge { node: a, old: self.edge[a] });
        self.edge[a] = Some((b, reason));
        let (child, root) = if self.size[ra] <= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[child] = root;
        self.size[root] += self.size[child];
        self.undo.push(Undo::Union { child, root });
    }

    /// Merges `a` and `b` and closes under congruence.
    fn merge(&mut self, a: usize, b: usize, reason: Reason) {
        self.union(a, b, reason);
        self.close();
    }

    fn close(&mut self) {
        loop {
            let mut table: HashMap<(FunSym, Vec<usize>), usize> = HashMap::new();
            let mut pending = Vec::new();
            for n in 0..self.nodes.len() {
                if self.nodes[n].args.is_empty() {
                    continue;
                }
                let sig = (self.nodes[n].fun, self.nodes[n].args.iter().map(|&a| self.find(a)).collect());
                match table.get(&sig) {
                    Some(&m) if self.find(m) != self.find(n) => pending.push((m, n)),
                    Some(_) => {}
                    None => {
                        table.insert(sig, n);
                    }
                }
            }
            if pending.is_empty() {
                break;
            }
            for (m, n) in pending {
                self.union(m, n, Reason::Congruence(m, n));
            }
        }
        self.dirty = false;
    }

    fn ensure_closed(&mut self) {
        if self.dirty {
            self.close();
        }
    }

    fn path_to_root(&self, mut n: usize) -> Vec<usize> {
        let mut path = vec![n];
        while let Some((m, _)) = self.edge[n] {
            path.push(m);
            n = m;
        }
        path
    }

    /// Literals justifying `a = b`; the two must be in one class.
    fn explain(&self, a: usize, b: usize) -> Vec<Literal> {
        let mut out = Vec::new();
        let mut todo = vec![(a, b)];
        let mut done: HashSet<(usize, usize)> = HashSet::new();
        while let Some((a, b)) = todo.pop() {
            if a == b || !done.insert((a.min(b), a.max(b))) {
                continue;
            }
            let pa = self.path_to_root(a);
            let pb = self.path_to_root(b);
            let on_b: HashSet<usize> = pb.iter().copied().collect();
            let nca = *pa.iter().find(|n| on_b.contains(n)).expect("nodes share a proof tree");
            for path in [&pa, &pb] {
                for &n in path.iter().take_while(|&&n| n != nca) {
                    let (_, r) = self.edge[n].expect("edge below ancestor");
                    match r {
                        Reason::Lit(l) => out.push(l),
                        Reason::Congruence(x, y) => {
                            for (p, q) in self.nodes[x].args.iter().zip(&self.nodes[y].args) {
                                todo.push((*p, *q));
                            }
                        }
                    }
                }
            }
        }
        dedup_lits(out)
    }

    fn diseq_conflict(&self) -> Option<Vec<Literal>> {
        for &(a, b, lit) in &self.diseqs {
            if self.find(a) == self.find(b) {
                let mut e = self.explain(a, b);
                e.push(lit);
                return Some(dedup_lits(e));
            }
        }
        None
    }

    fn sides(&mut self, ctx: &Context, atom: AtomId) -> Result<(usize, usize)> {
        if let Some(&s) = self.atoms.get(&atom) {
            return Ok(s);
        }
        let Atom::Eq(a, b) = ctx.atoms.get(atom) else {
            return Err(Error::WrongTheory("EUF"));
        };
        let (a, b) = (*a, *b);
        let s = (self.node(ctx, a), self.node(ctx, b));
        self.atoms.insert(atom, s);
        Ok(s)
    }
}

impl TheorySolver for EufSolver {
    fn name(&self) -> &'static str {
        "EUF"
    }

    fn register_atom(&mut self, ctx: &Context, atom: AtomId) -> Result<()> {
        self.sides(ctx, atom).map(|_| ())
    }

    fn assert_literal(&mut self, ctx: &Context, lit: Literal) -> Result<Option<Vec<Literal>>> {
        let (a, b) = self.sides(ctx, lit.atom)?;
        self.asserted.push(lit);
        *self.asserted_atoms.entry(lit.atom).or_default() += 1;
        self.undo.push(Undo::Asserted(lit.atom));
        self.ensure_closed();
        if lit.positive {
            self.merge(a, b, Reason::Lit(lit));
        } else {
            self.diseqs.push((a, b, lit));
            self.undo.push(Undo::Diseq);
        }
        Ok(self.diseq_conflict())
    }

    fn check(&mut self) -> Option<Vec<Literal>> {
        self.ensure_closed();
        self.diseq_conflict()
    }

    fn check_full(&mut self) -> TheoryVerdict {
        if let Some(c) = self.check() {
            return TheoryVerdict::Conflict(c);
        }
        let mut least: HashMap<usize, TermId> = HashMap::new();
        for (n, node) in self.nodes.iter().enumerate() {
            let r = self.find(n);
            let e = least.entry(r).or_insert(node.term);
            *e = (*e).min(node.term);
        }
        let m = self.nodes.iter().enumerate().map(|(n, node)| (node.term, least[&self.find(n)])).collect();
        TheoryVerdict::Sat(Witness::Euf(m))
    }

    fn deductions(&mut self) -> Vec<Deduction> {
        self.ensure_closed();
        let mut out = Vec::new();
        for (&atom, &(a, b)) in &self.atoms {
            if self.asserted_atoms.contains_key(&atom) {
                continue;
            }
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                out.push(Deduction { lit: Literal::pos(atom), explanation: self.explain(a, b) });
                continue;
            }
            for &(x, y, lit) in &self.diseqs {
                let (rx, ry) = (self.find(x), self.find(y));
                let (p, q) = if (rx, ry) == (ra, rb) {
                    (x, y)
                } else if (rx, ry) == (rb, ra) {
                    (y, x)
                } else {
                    continue;
                };
                let mut e = self.explain(a, p);
                e.extend(self.explain(b, q));
                e.push(lit);
                out.push(Deduction { lit: Literal::neg(atom), explanation: dedup_lits(e) });
                break;
            }
        }
        out
    }

    fn mark(&mut self) -> Mark {
        self.ensure_closed();
        self.marks.push(self.undo.len());
        Mark(self.marks.len() - 1)
    }

    fn backtrack(&mut self, mark: Mark) -> Result<()> {
        let n = *self.marks.get(mark.0).ok_or(Error::StaleMark(mark.0))?;
        while self.undo.len() > n {
            match self.undo.pop().expect("nonempty") {
                Undo::Union { child, root } => {
                    self.parent[child] = child;
                    self.size[root] -= self.size[child];
                }
                Undo::Edge { node, old } => self.edge[node] = old,
                Undo::Asserted(a) => {
                    self.asserted.pop();
                    let c = self.asserted_atoms.get_mut(&a).expect("asserted");
                    *c -= 1;
                    if *c == 0 {
                        self.asserted_atoms.remove(&a);
                    }
                }
                Undo::Diseq => {
                    self.diseqs.pop();
                }
            }
        }
        self.marks.truncate(mark.0);
        self.dirty = true;
        Ok(())
    }

    fn asserted(&self) -> &[Literal] {
        &self.asserted
    }
}
