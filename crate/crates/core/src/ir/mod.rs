//! Terms, atoms, literals and clauses, and the atom table that abstracts
//! theory atoms into Boolean variables.

mod linear;

use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

pub use linear::{Canonical, LinExpr, LinearAtom, Rational, RealVar, Rel};

use crate::error::{Error, Result};
use crate::sat::{Lit, Var};

/// Sorts of the supported fragment.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Real,
    /// An uninterpreted sort, by index into the signature's sort list.
    Uninterpreted(u32),
}

/// An uninterpreted function or constant symbol.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunSym(pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub ret: Sort,
}

/// What a declared name refers to.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Symbol {
    Bool,
    Real(RealVar),
    Fun(FunSym),
}

/// Declared sorts and symbols, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    sorts: Vec<String>,
    real_vars: Vec<String>,
    funs: Vec<FunDecl>,
    names: HashMap<String, Symbol>,
    order: Vec<(String, Symbol)>,
    true_fun: Option<FunSym>,
}

impl Signature {
    pub fn declare_sort(&mut self, name: &str) -> Result<Sort> {
        if self.sorts.iter().any(|s| s == name) || matches!(name, "Bool" | "Real" | "Int") {
            return Err(Error::Sort(format!("sort `{name}` declared twice")));
        }
        self.sorts.push(name.to_string());
        Ok(Sort::Uninterpreted(self.sorts.len() as u32 - 1))
    }

    pub fn sort_by_name(&self, name: &str) -> Option<Sort> {
        match name {
            "Bool" => Some(Sort::Bool),
            "Real" | "Int" => Some(Sort::Real),
            _ => self.sorts.iter().position(|s| s == name).map(|i| Sort::Uninterpreted(i as u32)),
        }
    }

    pub fn sort_name(&self, sort: Sort) -> &str {
        match sort {
            Sort::Bool => "Bool",
            Sort::Real => "Real",
            Sort::Uninterpreted(i) => &self.sorts[i as usize],
        }
    }

    /// Declares a symbol. Zero-ary Bool and Real symbols become propositional
    /// and theory variables; everything else is an uninterpreted function.
    pub fn declare(&mut self, name: &str, args: Vec<Sort>, ret: Sort) -> Result<Symbol> {
        if self.names.contains_key(name) {
            return Err(Error::Sort(format!("symbol `{name}` declared twice")));
        }
        let sym = match (args.is_empty(), ret) {
            (true, Sort::Bool) => Symbol::Bool,
            (true, Sort::Real) => {
                self.real_vars.push(name.to_string());
                Symbol::Real(RealVar(self.real_vars.len() as u32 - 1))
            }
            _ => {
                if ret == Sort::Real || args.contains(&Sort::Real) {
                    return Err(Error::Unsupported(format!(
                        "function `{name}` mixes arithmetic and uninterpreted sorts"
                    )));
                }
                if args.contains(&Sort::Bool) {
                    return Err(Error::Unsupported(format!("function `{name}` takes a Bool argument")));
                }
                self.funs.push(FunDecl { name: name.to_string(), args, ret });
                Symbol::Fun(FunSym(self.funs.len() as u32 - 1))
            }
        };
        self.names.insert(name.to_string(), sym);
        self.order.push((name.to_string(), sym));
        Ok(sym)
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.names.get(name).copied()
    }

    pub fn fun(&self, f: FunSym) -> &FunDecl {
        &self.funs[f.0 as usize]
    }

    pub fn real_var_name(&self, v: RealVar) -> &str {
        &self.real_vars[v.0 as usize]
    }

    pub fn real_vars(&self) -> impl Iterator<Item = (RealVar, &str)> {
        self.real_vars.iter().enumerate().map(|(i, n)| (RealVar(i as u32), n.as_str()))
    }

    pub fn num_real_vars(&self) -> usize {
        self.real_vars.len()
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    /// User declarations in order (excludes internal symbols).
    pub fn declarations(&self) -> &[(String, Symbol)] {
        &self.order
    }

    /// The internal Boolean constant used to turn predicate applications
    /// into equalities.
    pub fn true_fun(&mut self) -> FunSym {
        if let Some(f) = self.true_fun {
            return f;
        }
        self.funs.push(FunDecl { name: "true".into(), args: vec![], ret: Sort::Bool });
        let f = FunSym(self.funs.len() as u32 - 1);
        self.true_fun = Some(f);
        f
    }

    pub fn is_true_fun(&self, f: FunSym) -> bool {
        self.true_fun == Some(f)
    }
}

/// A hash-consed uninterpreted term. Ids follow creation order, which is the
/// fixed total order used to orient equality atoms.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct App {
    pub fun: FunSym,
    pub args: Vec<TermId>,
}

#[derive(Clone, Debug, Default)]
pub struct TermTable {
    apps: Vec<App>,
    sorts: Vec<Sort>,
    index: HashMap<App, TermId>,
}

impl TermTable {
    /// Builds `fun(args)`, checking arity and argument sorts.
    pub fn mk_app(&mut self, sig: &Signature, fun: FunSym, args: Vec<TermId>) -> Result<TermId> {
        let decl = sig.fun(fun);
        if decl.args.len() != args.len() {
            return Err(Error::Sort(format!(
                "`{}` expects {} arguments, got {}",
                decl.name,
                decl.args.len(),
                args.len()
            )));
        }
        for (i, (want, a)) in decl.args.iter().zip(&args).enumerate() {
            if self.sort(*a) != *want {
                return Err(Error::Sort(format!(
                    "argument {} of `{}` has sort {}, expected {}",
                    i + 1,
                    decl.name,
                    sig.sort_name(self.sort(*a)),
                    sig.sort_name(*want)
                )));
            }
        }
        let app = App { fun, args };
        if let Some(id) = self.index.get(&app) {
            return Ok(*id);
        }
        let id = TermId(self.apps.len() as u32);
        self.sorts.push(decl.ret);
        self.index.insert(app.clone(), id);
        self.apps.push(app);
        Ok(id)
    }

    pub fn app(&self, t: TermId) -> &App {
        &self.apps[t.0 as usize]
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.sorts[t.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.apps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.apps.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TermId> {
        (0..self.apps.len() as u32).map(TermId)
    }
}

/// An atom of the abstraction alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// A propositional variable.
    Bool(String),
    Linear(LinearAtom),
    /// Equality between uninterpreted terms, smaller id first.
    Eq(TermId, TermId),
}

impl Atom {
    /// Orients an equality; `a = a` folds to true.
    pub fn equality(a: TermId, b: TermId) -> Canonical<Atom> {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => Canonical::Const(true),
            std::cmp::Ordering::Less => Canonical::Lit(Atom::Eq(a, b), true),
            std::cmp::Ordering::Greater => Canonical::Lit(Atom::Eq(b, a), true),
        }
    }

    pub fn linear(expr: &LinExpr, rel: Rel) -> Canonical<Atom> {
        match LinearAtom::canonicalize(expr, rel) {
            Canonical::Const(b) => Canonical::Const(b),
            Canonical::Lit(a, pol) => Canonical::Lit(Atom::Linear(a), pol),
        }
    }

    pub fn is_theory(&self) -> bool {
        !matches!(self, Atom::Bool(_))
    }
}

/// Index of an atom in its table. Its Boolean variable is `Var(id)`, i.e.
/// DIMACS variable `id + 1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn var(self) -> Var {
        Var(self.0)
    }
}

/// Append-only bijection between atoms and Boolean variables.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
}

impl AtomTable {
    fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(id) = self.index.get(&atom) {
            return *id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

    pub fn get(&self, id: AtomId) -> &Atom {
        &self.atoms[id.0 as usize]
    }

    pub fn lookup(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &Atom)> {
        self.atoms.iter().enumerate().map(|(i, a)| (AtomId(i as u32), a))
    }
}

/// A theory or propositional literal.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: AtomId,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: AtomId, positive: bool) -> Literal {
        Literal { atom, positive }
    }

    pub fn pos(atom: AtomId) -> Literal {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: AtomId) -> Literal {
        Literal { atom, positive: false }
    }

    /// The abstraction of this literal.
    pub fn to_lit(self) -> Lit {
        Lit::new(self.atom.var(), self.positive)
    }

    pub fn from_lit(l: Lit) -> Literal {
        Literal { atom: AtomId(l.var().0), positive: l.is_positive() }
    }
}

impl Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        Literal { atom: self.atom, positive: !self.positive }
    }
}

/// Where a clause came from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Index of the clause in the input formula.
    Original(usize),
    /// Index into the lemma store of a run.
    TLemma(usize),
    Learned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    lits: Vec<Literal>,
    origin: Origin,
    assertion: Option<usize>,
}

impl Clause {
    /// Builds a clause, merging duplicate literals and rejecting tautologies.
    pub fn new(lits: impl IntoIterator<Item = Literal>, origin: Origin, assertion: Option<usize>) -> Result<Clause> {
        let mut out: Vec<Literal> = Vec::new();
        for l in lits {
            if out.contains(&!l) {
                return Err(Error::Tautology { assertion });
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Ok(Clause { lits: out, origin, assertion })
    }

    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Id of the input assertion this clause was generated from.
    pub fn assertion(&self) -> Option<usize> {
        self.assertion
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }
}

/// Which theory solver a formula needs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Logic {
    Euf,
    Lra,
    /// No theory atoms at all.
    Propositional,
}

/// Signature, terms and atoms shared by a formula and every run on it.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub sig: Signature,
    pub terms: TermTable,
    pub atoms: AtomTable,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    /// Interns an atom, checking that it is well-sorted. Atoms built through
    /// [`Atom::linear`] and [`Atom::equality`] are already canonical, so
    /// re-interning an equal constraint returns the same id.
    pub fn intern_atom(&mut self, atom: Atom) -> Result<AtomId> {
        match &atom {
            Atom::Bool(name) => match self.sig.lookup(name) {
                Some(Symbol::Bool) => {}
                Some(_) => return Err(Error::Sort(format!("`{name}` is not Boolean"))),
                None if name.starts_with('!') => {}
                None => return Err(Error::Undeclared(name.clone())),
            },
            Atom::Linear(a) => {
                if let Some((v, _)) = a.coeffs().iter().find(|(v, _)| v.index() >= self.sig.num_real_vars()) {
                    return Err(Error::Sort(format!("unknown real variable #{}", v.0)));
                }
            }
            Atom::Eq(a, b) => {
                for t in [a, b] {
                    if t.0 as usize >= self.terms.len() {
                        return Err(Error::Sort(format!("unknown term #{}", t.0)));
                    }
                }
                let (sa, sb) = (self.terms.sort(*a), self.terms.sort(*b));
                if sa != sb {
                    return Err(Error::Sort(format!(
                        "equality between sorts {} and {}",
                        self.sig.sort_name(sa),
                        self.sig.sort_name(sb)
                    )));
                }
                if a >= b {
                    return Err(Error::Sort("equality atom sides are not oriented".into()));
                }
            }
        }
        Ok(self.atoms.intern(atom))
    }

    /// Interns a fresh auxiliary propositional variable.
    pub(crate) fn fresh_aux(&mut self) -> AtomId {
        let name = format!("!aux{}", self.atoms.len());
        self.atoms.intern(Atom::Bool(name))
    }

    /// The Boolean abstraction of a clause.
    pub fn t2p(&self, clause: &[Literal]) -> Vec<Lit> {
        clause.iter().map(|l| l.to_lit()).collect()
    }

    /// The refinement of a Boolean clause.
    pub fn p2t(&self, clause: &[Lit]) -> Result<Vec<Literal>> {
        clause
            .iter()
            .map(|l| {
                if l.var().index() < self.atoms.len() {
                    Ok(Literal::from_lit(*l))
                } else {
                    Err(Error::UnknownVariable(l.var().0 + 1))
                }
            })
            .collect()
    }

    pub fn display_term(&self, t: TermId) -> TermDisplay<'_> {
        TermDisplay { ctx: self, term: t }
    }

    pub fn display_atom(&self, a: AtomId) -> AtomDisplay<'_> {
        AtomDisplay { ctx: self, atom: a }
    }

    pub fn display_literal(&self, l: Literal) -> LiteralDisplay<'_> {
        LiteralDisplay { ctx: self, lit: l }
    }

    pub fn display_clause<'a>(&'a self, lits: &'a [Literal]) -> ClauseDisplay<'a> {
        ClauseDisplay { ctx: self, lits }
    }
}

impl RealVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A CNF formula over an owned context; clause `i` has origin `Original(i)`.
#[derive(Clone, Debug)]
pub struct Formula {
    pub ctx: Context,
    clauses: Vec<Clause>,
    logic: Logic,
    assertions: usize,
}

impl Formula {
    /// Assembles a formula. Clauses are renumbered `Original(0..n)` in order.
    pub fn new(ctx: Context, clauses: Vec<Clause>, logic: Logic, assertions: usize) -> Result<Formula> {
        let clauses = clauses
            .into_iter()
            .enumerate()
            .map(|(i, c)| Clause { origin: Origin::Original(i), ..c })
            .collect::<Vec<_>>();
        for c in &clauses {
            for l in c.lits() {
                if l.atom.0 as usize >= ctx.atoms.len() {
                    return Err(Error::UnknownVariable(l.atom.0 + 1));
                }
            }
        }
        let has = |p: fn(&Atom) -> bool| ctx.atoms.iter().any(|(_, a)| p(a));
        let euf = has(|a| matches!(a, Atom::Eq(..)));
        let lra = has(|a| matches!(a, Atom::Linear(_)));
        let logic = match (logic, euf, lra) {
            (_, true, true) => return Err(Error::Unsupported("theory combination of EUF and LRA".into())),
            (Logic::Lra, true, _) => return Err(Error::Unsupported("equality over uninterpreted terms in LRA".into())),
            (Logic::Euf, _, true) => return Err(Error::Unsupported("arithmetic in EUF".into())),
            (Logic::Propositional, true, _) => Logic::Euf,
            (Logic::Propositional, _, true) => Logic::Lra,
            (l, _, _) => l,
        };
        Ok(Formula { ctx, clauses, logic, assertions })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, i: usize) -> &Clause {
        &self.clauses[i]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn logic(&self) -> Logic {
        self.logic
    }

    pub fn num_assertions(&self) -> usize {
        self.assertions
    }

    /// Abstraction of clause `i`.
    pub fn abstract_clause(&self, i: usize) -> Vec<Lit> {
        self.ctx.t2p(self.clauses[i].lits())
    }

    /// The sub-formula induced by `indices` (renumbered from 0).
    pub fn restrict(&self, indices: &[usize]) -> Formula {
        Formula {
            ctx: self.ctx.clone(),
            clauses: indices
                .iter()
                .enumerate()
                .map(|(k, &i)| Clause { origin: Origin::Original(k), ..self.clauses[i].clone() })
                .collect(),
            logic: self.logic,
            assertions: self.assertions,
        }
    }

    /// Assertion ids covered by a set of clause indices.
    pub fn assertions_of(&self, indices: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = indices.iter().filter_map(|&i| self.clauses.get(i)?.assertion()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub struct TermDisplay<'a> {
    ctx: &'a Context,
    term: TermId,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let app = self.ctx.terms.app(self.term);
        let name = quote_symbol(&self.ctx.sig.fun(app.fun).name);
        if app.args.is_empty() {
            return f.write_str(&name);
        }
        write!(f, "({name}")?;
        for a in &app.args {
            write!(f, " {}", self.ctx.display_term(*a))?;
        }
        f.write_str(")")
    }
}

/// `name` as an SMT-LIB symbol, quoted with `|` when it is not a simple
/// symbol.
pub fn quote_symbol(name: &str) -> std::borrow::Cow<'_, str> {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.into()
    } else {
        format!("|{name}|").into()
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    use num_traits::Signed;
    let body = |f: &mut fmt::Formatter<'_>, r: &Rational| {
        if r.is_integer() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "(/ {} {})", r.numer(), r.denom())
        }
    };
    if r.is_negative() {
        f.write_str("(- ")?;
        body(f, &-r)?;
        f.write_str(")")
    } else {
        body(f, r)
    }
}

pub struct AtomDisplay<'a> {
    ctx: &'a Context,
    atom: AtomId,
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::One;
        match self.ctx.atoms.get(self.atom) {
            Atom::Bool(name) => f.write_str(&quote_symbol(name)),
            Atom::Eq(a, b) => {
                let app_b = self.ctx.terms.app(*b);
                if self.ctx.sig.is_true_fun(app_b.fun) {
                    write!(f, "{}", self.ctx.display_term(*a))
                } else {
                    write!(f, "(= {} {})", self.ctx.display_term(*a), self.ctx.display_term(*b))
                }
            }
            Atom::Linear(la) => {
                write!(f, "({} ", la.rel())?;
                let terms = la.coeffs();
                if terms.len() > 1 {
                    f.write_str("(+")?;
                }
                for (i, (v, c)) in terms.iter().enumerate() {
                    if terms.len() > 1 || i > 0 {
                        f.write_str(" ")?;
                    }
                    let name = quote_symbol(self.ctx.sig.real_var_name(*v));
                    if c.is_one() {
                        f.write_str(&name)?;
                    } else {
                        f.write_str("(* ")?;
                        fmt_rational(f, &Rational::from_integer(c.clone()))?;
                        write!(f, " {name})")?;
                    }
                }
                if terms.len() > 1 {
                    f.write_str(")")?;
                }
                f.write_str(" ")?;
                fmt_rational(f, &Rational::from_integer(-la.constant().clone()))?;
                f.write_str(")")
            }
        }
    }
}

pub struct LiteralDisplay<'a> {
    ctx: &'a Context,
    lit: Literal,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lit.positive {
            write!(f, "{}", self.ctx.display_atom(self.lit.atom))
        } else {
            write!(f, "(not {})", self.ctx.display_atom(self.lit.atom))
        }
    }
}

pub struct ClauseDisplay<'a> {
    ctx: &'a Context,
    lits: &'a [Literal],
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lits {
            [] => f.write_str("false"),
            [l] => write!(f, "{}", self.ctx.display_literal(*l)),
            ls => {
                f.write_str("(or")?;
                for l in ls {
                    write!(f, " {}", self.ctx.display_literal(*l))?;
                }
                f.write_str(")")
            }
        }
    }
}
