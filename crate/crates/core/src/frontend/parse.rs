use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::sexp::{err, read_all, Pos, Sexp};
use crate::error::{Error, Result};
use crate::ir::{Atom, Canonical, Context, LinExpr, Literal, Logic, Rational, Rel, Sort, Symbol, TermId};

/// Boolean structure over interned literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Lit(Literal),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

/// Parsed input: one Boolean expression per `assert`, in file order.
#[derive(Clone, Debug)]
pub struct AssertionSet {
    pub ctx: Context,
    pub assertions: Vec<Expr>,
    pub logic: Logic,
    /// Non-fatal diagnostics, such as integer logics read over the
    /// rationals.
    pub warnings: Vec<String>,
}

enum Val {
    Bool(Expr),
    Real(LinExpr),
    Uf(TermId),
}

struct Parser {
    ctx: Context,
    assertions: Vec<Expr>,
    logic: Logic,
    warnings: Vec<String>,
}

fn lit_of(c: Canonical<Atom>, ctx: &mut Context) -> Result<Expr> {
    Ok(match c {
        Canonical::Const(b) => Expr::Const(b),
        Canonical::Lit(a, pol) => Expr::Lit(Literal::new(ctx.intern_atom(a)?, pol)),
    })
}

fn parse_number(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let q = match body.split_once('.') {
        None => Rational::from_integer(body.parse::<BigInt>().ok()?),
        Some((i, f)) => {
            if i.is_empty() || f.is_empty() || f.contains('.') {
                return None;
            }
            let num: BigInt = format!("{i}{f}").parse().ok()?;
            Rational::new(num, BigInt::from(10u32).pow(f.len() as u32))
        }
    };
    Some(if neg { -q } else { q })
}

impl Parser {
    fn sort(&self, s: &Sexp) -> Result<Sort> {
        let name = s.as_atom().ok_or_else(|| err(s.pos(), "expected a sort"))?;
        self.ctx.sig.sort_by_name(name).ok_or_else(|| err(s.pos(), format!("unknown sort `{name}`")))
    }

    fn bool_arg(&mut self, s: &Sexp) -> Result<Expr> {
        match self.term(s)? {
            Val::Bool(e) => Ok(e),
            _ => Err(err(s.pos(), "expected a Boolean expression")),
        }
    }

    fn real_arg(&mut self, s: &Sexp) -> Result<LinExpr> {
        match self.term(s)? {
            Val::Real(e) => Ok(e),
            _ => Err(err(s.pos(), "expected an arithmetic expression")),
        }
    }

    fn term(&mut self, s: &Sexp) -> Result<Val> {
        match s {
            Sexp::Atom(a, pos) => self.symbol(a, *pos),
            Sexp::List(items, pos) => {
                let Some((head, args)) = items.split_first() else {
                    return Err(err(*pos, "empty application"));
                };
                let Some(h) = head.as_atom() else {
                    return Err(err(head.pos(), "expected an operator"));
                };
                self.apply(h, args, *pos)
            }
        }
    }

    fn symbol(&mut self, a: &str, pos: Pos) -> Result<Val> {
        if let Some(q) = parse_number(a) {
            return Ok(Val::Real(LinExpr::constant(q)));
        }
        match a {
            "true" => return Ok(Val::Bool(Expr::Const(true))),
            "false" => return Ok(Val::Bool(Expr::Const(false))),
            _ => {}
        }
        match self.ctx.sig.lookup(a) {
            None => Err(Error::Undeclared(a.to_string())),
            Some(Symbol::Bool) => Ok(Val::Bool(Expr::Lit(Literal::pos(self.ctx.intern_atom(Atom::Bool(a.into()))?)))),
            Some(Symbol::Real(v)) => Ok(Val::Real(LinExpr::var(v))),
            Some(Symbol::Fun(f)) => {
                let t = self.ctx.terms.mk_app(&self.ctx.sig, f, vec![]).map_err(|e| at(e, pos))?;
                Ok(Val::Uf(t))
            }
        }
    }

    fn apply(&mut self, h: &str, args: &[Sexp], pos: Pos) -> Result<Val> {
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(pos, format!("`{h}` expects {n} arguments, got {}", args.len())))
            }
        };
        let at_least = |n: usize| -> Result<()> {
            if args.len() >= n {
                Ok(())
            } else {
                Err(err(pos, format!("`{h}` expects at least {n} arguments")))
            }
        };
        let e = match h {
            "not" => {
                arity(1)?;
                Expr::Not(Box::new(self.bool_arg(&args[0])?))
            }
            "and" | "or" => {
                let xs = args.iter().map(|a| self.bool_arg(a)).collect::<Result<Vec<_>>>()?;
                if h == "and" {
                    Expr::And(xs)
                } else {
                    Expr::Or(xs)
                }
            }
            "=>" => {
                at_least(2)?;
                let xs = args.iter().map(|a| self.bool_arg(a)).collect::<Result<Vec<_>>>()?;
                let (last, init) = xs.split_last().expect("two arguments");
                init.iter().rev().fold(last.clone(), |acc, a| Expr::Or(vec![Expr::Not(Box::new(a.clone())), acc]))
            }
            "xor" => {
                arity(2)?;
                let (a, b) = (self.bool_arg(&args[0])?, self.bool_arg(&args[1])?);
                Expr::Not(Box::new(Expr::Iff(Box::new(a), Box::new(b))))
            }
            "ite" => {
                arity(3)?;
                let c = self.bool_arg(&args[0])?;
                match (self.term(&args[1])?, self.term(&args[2])?) {
                    (Val::Bool(t), Val::Bool(e)) => Expr::Ite(Box::new(c), Box::new(t), Box::new(e)),
                    _ => return Err(Error::Unsupported(format!("non-Boolean ite at {}:{}", pos.line, pos.col))),
                }
            }
            "=" | "distinct" => {
                at_least(2)?;
                let vals = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>>>()?;
                let pairs: Vec<(usize, usize)> = if h == "=" {
                    (1..vals.len()).map(|i| (i - 1, i)).collect()
                } else {
                    (0..vals.len()).flat_map(|i| (i + 1..vals.len()).map(move |j| (i, j))).collect()
                };
                let mut conj = Vec::new();
                for (i, j) in pairs {
                    let eq = self.equal(&vals[i], &vals[j], pos)?;
                    conj.push(if h == "=" { eq } else { Expr::Not(Box::new(eq)) });
                }
                if conj.len() == 1 {
                    conj.pop().expect("one")
                } else {
                    Expr::And(conj)
                }
            }
            "<=" | "<" | ">=" | ">" => {
                at_least(2)?;
                let xs = args.iter().map(|a| self.real_arg(a)).collect::<Result<Vec<_>>>()?;
                let mut conj = Vec::new();
                for w in xs.windows(2) {
                    // a >= b is b <= a, a > b is b < a
                    let (lhs, rhs, rel) = match h {
                        "<=" => (&w[0], &w[1], Rel::Le),
                        "<" => (&w[0], &w[1], Rel::Lt),
                        ">=" => (&w[1], &w[0], Rel::Le),
                        _ => (&w[1], &w[0], Rel::Lt),
                    };
                    let mut e = lhs.clone();
                    e.sub(rhs);
                    conj.push(lit_of(Atom::linear(&e, rel), &mut self.ctx)?);
                }
                if conj.len() == 1 {
                    conj.pop().expect("one")
                } else {
                    Expr::And(conj)
                }
            }
            "+" => {
                let mut acc = LinExpr::zero();
                for a in args {
                    acc.add(&self.real_arg(a)?);
                }
                return Ok(Val::Real(acc));
            }
            "-" => {
                at_least(1)?;
                let mut acc = self.real_arg(&args[0])?;
                if args.len() == 1 {
                    acc.scale(&-Rational::one());
                }
                for a in &args[1..] {
                    acc.sub(&self.real_arg(a)?);
                }
                return Ok(Val::Real(acc));
            }
            "*" => {
                at_least(1)?;
                let mut k = Rational::one();
                let mut var: Option<LinExpr> = None;
                for a in args {
                    let e = self.real_arg(a)?;
                    if e.is_constant() {
                        k *= e.constant_term();
                    } else if var.is_none() {
                        var = Some(e);
                    } else {
                        return Err(Error::Unsupported(format!("nonlinear product at {}:{}", pos.line, pos.col)));
                    }
                }
                let mut e = var.unwrap_or_else(|| LinExpr::constant(Rational::one()));
                e.scale(&k);
                return Ok(Val::Real(e));
            }
            "/" => {
                arity(2)?;
                let num = self.real_arg(&args[0])?;
                let den = self.real_arg(&args[1])?;
                if !den.is_constant() || den.constant_term().is_zero() {
                    return Err(Error::Unsupported(format!(
                        "division by a non-constant or zero at {}:{}",
                        pos.line, pos.col
                    )));
                }
                let mut e = num;
                e.scale(&(Rational::one() / den.constant_term()));
                return Ok(Val::Real(e));
            }
            "!" => {
                at_least(1)?;
                return self.term(&args[0]);
            }
            "let" | "forall" | "exists" | "select" | "store" => {
                return Err(Error::Unsupported(format!("`{h}` at {}:{}", pos.line, pos.col)));
            }
            _ => {
                let Some(Symbol::Fun(f)) = self.ctx.sig.lookup(h) else {
                    return match self.ctx.sig.lookup(h) {
                        None => Err(Error::Undeclared(h.to_string())),
                        Some(_) => Err(err(pos, format!("`{h}` is not a function"))),
                    };
                };
                let mut targs = Vec::new();
                for a in args {
                    match self.term(a)? {
                        Val::Uf(t) => targs.push(t),
                        _ => return Err(err(a.pos(), format!("argument of `{h}` must be an uninterpreted term"))),
                    }
                }
                let t = self.ctx.terms.mk_app(&self.ctx.sig, f, targs).map_err(|e| at(e, pos))?;
                if self.ctx.terms.sort(t) != Sort::Bool {
                    return Ok(Val::Uf(t));
                }
                let tf = self.ctx.sig.true_fun();
                let tt = self.ctx.terms.mk_app(&self.ctx.sig, tf, vec![])?;
                lit_of(Atom::equality(t, tt), &mut self.ctx)?
            }
        };
        Ok(Val::Bool(e))
    }

    fn equal(&mut self, a: &Val, b: &Val, pos: Pos) -> Result<Expr> {
        match (a, b) {
            (Val::Bool(x), Val::Bool(y)) => Ok(Expr::Iff(Box::new(x.clone()), Box::new(y.clone()))),
            (Val::Real(x), Val::Real(y)) => {
                let mut e = x.clone();
                e.sub(y);
                lit_of(Atom::linear(&e, Rel::Eq), &mut self.ctx)
            }
            (Val::Uf(x), Val::Uf(y)) => {
                let (sx, sy) = (self.ctx.terms.sort(*x), self.ctx.terms.sort(*y));
                if sx != sy {
                    return Err(err(
                        pos,
                        format!("`=` between sorts {} and {}", self.ctx.sig.sort_name(sx), self.ctx.sig.sort_name(sy)),
                    ));
                }
                lit_of(Atom::equality(*x, *y), &mut self.ctx)
            }
            _ => Err(err(pos, "`=` between different sorts")),
        }
    }

    fn command(&mut self, s: &Sexp) -> Result<()> {
        let Sexp::List(items, pos) = s else {
            return Err(err(s.pos(), "expected a command"));
        };
        let pos = *pos;
        let name = items.first().and_then(Sexp::as_atom).ok_or_else(|| err(pos, "expected a command name"))?;
        let args = &items[1..];
        match name {
            "set-logic" => {
                let l = args.first().and_then(Sexp::as_atom).ok_or_else(|| err(pos, "missing logic name"))?;
                self.logic = match l {
                    "QF_UF" => Logic::Euf,
                    "QF_LRA" | "QF_RDL" => Logic::Lra,
                    "QF_LIA" | "QF_IDL" => {
                        let w = format!("{l} is interpreted over the rationals; integrality is not enforced");
                        log::warn!("{w}");
                        self.warnings.push(w);
                        Logic::Lra
                    }
                    _ => return Err(Error::Unsupported(format!("logic {l}"))),
                };
            }
            "declare-sort" => {
                let n = args.first().and_then(Sexp::as_atom).ok_or_else(|| err(pos, "missing sort name"))?;
                if args.get(1).and_then(Sexp::as_atom).is_some_and(|a| a != "0") {
                    return Err(Error::Unsupported("parametric sorts".into()));
                }
                self.ctx.sig.declare_sort(n)?;
            }
            "declare-fun" | "declare-const" => {
                let n = args.first().and_then(Sexp::as_atom).ok_or_else(|| err(pos, "missing symbol name"))?;
                let (params, ret) = if name == "declare-fun" {
                    let Some(Sexp::List(ps, _)) = args.get(1) else {
                        return Err(err(pos, "missing parameter list"));
                    };
                    let ps = ps.iter().map(|p| self.sort(p)).collect::<Result<Vec<_>>>()?;
                    (ps, args.get(2).ok_or_else(|| err(pos, "missing return sort"))?)
                } else {
                    (vec![], args.get(1).ok_or_else(|| err(pos, "missing sort"))?)
                };
                let ret = self.sort(ret)?;
                self.ctx.sig.declare(n, params, ret)?;
            }
            "assert" => {
                if args.len() != 1 {
                    return Err(err(pos, "`assert` expects one argument"));
                }
                let e = self.bool_arg(&args[0])?;
                self.assertions.push(e);
            }
            "check-sat" | "exit" | "set-info" | "set-option" | "get-info" | "get-model" | "get-unsat-core"
            | "get-value" | "echo" => {}
            "push" | "pop" | "define-fun" | "define-sort" | "reset" => {
                return Err(Error::Unsupported(format!("command `{name}`")));
            }
            _ => return Err(err(pos, format!("unknown command `{name}`"))),
        }
        Ok(())
    }
}

fn at(e: Error, pos: Pos) -> Error {
    match e {
        Error::Sort(m) => Error::Sort(format!("{m} at {}:{}", pos.line, pos.col)),
        e => e,
    }
}

/// Parses the supported SMT-LIB subset.
///
/// ```
/// let set = lemlift::frontend::parse("(declare-fun y () Real) (assert (< y 0))").unwrap();
/// assert_eq!(set.assertions.len(), 1);
/// ```
pub fn parse(text: &str) -> Result<AssertionSet> {
    let mut p = Parser { ctx: Context::new(), assertions: Vec::new(), logic: Logic::Propositional, warnings: Vec::new() };
    for s in read_all(text)? {
        p.command(&s)?;
    }
    Ok(AssertionSet { ctx: p.ctx, assertions: p.assertions, logic: p.logic, warnings: p.warnings })
}
