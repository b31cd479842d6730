//! Theory solvers: congruence closure for equality with uninterpreted
//! functions and a general simplex for linear rational arithmetic.

mod delta;
mod euf;
mod lra;

use std::collections::BTreeMap;

pub use delta::DeltaRational;
pub use euf::EufSolver;
pub use lra::LraSolver;

use crate::error::{Error, Result};
use crate::ir::{Atom, Context, Literal, Logic, Rational, RealVar, TermId};

/// A satisfying assignment for the asserted theory literals.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Witness {
    #[default]
    Empty,
    /// Values of the real variables; unlisted variables are 0.
    Lra(BTreeMap<RealVar, Rational>),
    /// Each known term mapped to the smallest term of its class.
    Euf(BTreeMap<TermId, TermId>),
}

impl Witness {
    /// Truth value of a theory atom, or `None` for propositional atoms.
    pub fn eval_atom(&self, atom: &Atom) -> Option<bool> {
        match (self, atom) {
            (_, Atom::Bool(_)) => None,
            (Witness::Lra(m), Atom::Linear(a)) => {
                Some(a.eval(|v| m.get(&v).cloned().unwrap_or_else(|| Rational::from_integer(0.into()))))
            }
            (Witness::Empty, Atom::Linear(a)) => Some(a.eval(|_| Rational::from_integer(0.into()))),
            (Witness::Euf(m), Atom::Eq(a, b)) => {
                let rep = |t: &TermId| m.get(t).copied().unwrap_or(*t);
                Some(rep(a) == rep(b))
            }
            (_, Atom::Eq(a, b)) => Some(a == b),
            (Witness::Euf(_), Atom::Linear(_)) => None,
        }
    }
}

/// Outcome of a full consistency check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryVerdict {
    Sat(Witness),
    /// A theory-inconsistent subset of the asserted literals.
    Conflict(Vec<Literal>),
}

/// `explanation` entails `lit` in the theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deduction {
    pub lit: Literal,
    pub explanation: Vec<Literal>,
}

/// A backtrack point.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Mark(pub(crate) usize);

/// Incremental, backtrackable decision procedure for conjunctions of theory
/// literals.
pub trait TheorySolver {
    fn name(&self) -> &'static str;

    /// Makes the solver aware of an atom so that it can be asserted and
    /// proposed in deductions. Registering twice is harmless.
    fn register_atom(&mut self, ctx: &Context, atom: crate::ir::AtomId) -> Result<()>;

    /// Asserts a literal, registering its atom if needed. Returns a conflict
    /// found cheaply during assertion.
    fn assert_literal(&mut self, ctx: &Context, lit: Literal) -> Result<Option<Vec<Literal>>>;

    /// Consistency check of the asserted literals, possibly incomplete (for
    /// instance, disequalities may be left to [`TheorySolver::check_full`]).
    fn check(&mut self) -> Option<Vec<Literal>>;

    /// Complete consistency check.
    fn check_full(&mut self) -> TheoryVerdict;

    /// Literals over registered, unasserted atoms implied by the asserted
    /// ones.
    fn deductions(&mut self) -> Vec<Deduction>;

    fn mark(&mut self) -> Mark;

    /// Restores the state at `mark`, discarding it and every later mark.
    fn backtrack(&mut self, mark: Mark) -> Result<()>;

    /// Asserted literals in assertion order.
    fn asserted(&self) -> &[Literal];
}

/// Solver for atoms without theory content.
#[derive(Default)]
pub struct NullTheory {
    asserted: Vec<Literal>,
    marks: Vec<usize>,
}

impl TheorySolver for NullTheory {
    fn name(&self) -> &'static str {
        "propositional"
    }
    fn register_atom(&mut self, ctx: &Context, atom: crate::ir::AtomId) -> Result<()> {
        match ctx.atoms.get(atom) {
            Atom::Bool(_) => Ok(()),
            _ => Err(Error::WrongTheory("propositional")),
        }
    }
    fn assert_literal(&mut self, ctx: &Context, lit: Literal) -> Result<Option<Vec<Literal>>> {
        self.register_atom(ctx, lit.atom)?;
        self.asserted.push(lit);
        Ok(None)
    }
    fn check(&mut self) -> Option<Vec<Literal>> {
        None
    }
    fn check_full(&mut self) -> TheoryVerdict {
        TheoryVerdict::Sat(Witness::Empty)
    }
    fn deductions(&mut self) -> Vec<Deduction> {
        Vec::new()
    }
    fn mark(&mut self) -> Mark {
        self.marks.push(self.asserted.len());
        Mark(self.marks.len() - 1)
    }
    fn backtrack(&mut self, mark: Mark) -> Result<()> {
        let n = *self.marks.get(mark.0).ok_or(Error::StaleMark(mark.0))?;
        self.asserted.truncate(n);
        self.marks.truncate(mark.0);
        Ok(())
    }
    fn asserted(&self) -> &[Literal] {
        &self.asserted
    }
}

/// A fresh solver for `logic`.
pub fn new_solver(logic: Logic) -> Box<dyn TheorySolver> {
    match logic {
        Logic::Euf => Box::new(EufSolver::new()),
        Logic::Lra => Box::new(LraSolver::new()),
        Logic::Propositional => Box::new(NullTheory::default()),
    }
}

/// Result of [`is_valid_lemma`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// A theory model falsifying every theory literal of the clause.
    Invalid(Witness),
}

/// Decides whether a clause is valid in its theory, using a fresh solver.
///
/// Propositional literals are treated as free: the clause is valid only if
/// it contains a complementary propositional pair or its theory part is
/// valid.
pub fn is_valid_lemma(ctx: &Context, clause: &[Literal]) -> Result<Validity> {
    let mut logic = None;
    for l in clause {
        let this = match ctx.atoms.get(l.atom) {
            Atom::Bool(_) => {
                if clause.contains(&!*l) {
                    return Ok(Validity::Valid);
                }
                continue;
            }
            Atom::Linear(_) => Logic::Lra,
            Atom::Eq(..) => Logic::Euf,
        };
        match logic {
            Some(prev) if prev != this => return Err(Error::Unsupported("clause mixes EUF and LRA literals".into())),
            _ => logic = Some(this),
        }
    }
    let Some(logic) = logic else {
        return Ok(Validity::Invalid(Witness::Empty));
    };
    let mut solver = new_solver(logic);
    for l in clause {
        if !ctx.atoms.get(l.atom).is_theory() {
            continue;
        }
        if solver.assert_literal(ctx, !*l)?.is_some() {
            return Ok(Validity::Valid);
        }
    }
    Ok(match solver.check_full() {
        TheoryVerdict::Conflict(_) => Validity::Valid,
        TheoryVerdict::Sat(w) => Validity::Invalid(w),
    })
}

fn dedup_lits(mut v: Vec<Literal>) -> Vec<Literal> {
    v.sort_unstable_by_key(|l| (l.atom, l.positive));
    v.dedup();
    v
}
