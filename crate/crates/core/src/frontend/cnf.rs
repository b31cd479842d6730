use super::parse::{AssertionSet, Expr};
use crate::error::{Error, Result};
use crate::ir::{Clause, Context, Formula, Literal, Origin};

/// CNF conversion settings.
#[derive(Copy, Clone, Debug)]
pub struct CnfOptions {
    /// An assertion is distributed into plain clauses when that yields at
    /// most this many clauses; otherwise it is translated definitionally.
    /// Zero forces the definitional translation for every assertion that is
    /// not already a single clause.
    pub distribute_limit: usize,
}

impl Default for CnfOptions {
    fn default() -> Self {
        CnfOptions { distribute_limit: 8 }
    }
}

/// Negation normal form over literals and constants, with `iff` and `ite`
/// expanded.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Nnf {
    Const(bool),
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn nnf(e: &Expr, positive: bool) -> Nnf {
    match e {
        Expr::Const(b) => Nnf::Const(*b == positive),
        Expr::Lit(l) => Nnf::Lit(if positive { *l } else { !*l }),
        Expr::Not(x) => nnf(x, !positive),
        Expr::And(xs) | Expr::Or(xs) => {
            let parts = xs.iter().map(|x| nnf(x, positive)).collect();
            if matches!(e, Expr::And(_)) == positive {
                Nnf::And(parts)
            } else {
                Nnf::Or(parts)
            }
        }
        Expr::Iff(a, b) => {
            // a <-> b  ==  (!a | b) & (a | !b);  !(a <-> b)  ==  (a | b) & (!a | !b)
            let (na, pa, nb, pb) = (nnf(a, false), nnf(a, true), nnf(b, false), nnf(b, true));
            if positive {
                Nnf::And(vec![Nnf::Or(vec![na, pb]), Nnf::Or(vec![pa, nb])])
            } else {
                Nnf::And(vec![Nnf::Or(vec![pa, pb]), Nnf::Or(vec![na, nb])])
            }
        }
        Expr::Ite(c, t, f) => Nnf::And(vec![
            Nnf::Or(vec![nnf(c, false), nnf(t, positive)]),
            Nnf::Or(vec![nnf(c, true), nnf(f, positive)]),
        ]),
    }
}

/// Folds constants and flattens nested connectives of the same kind.
fn simplify(n: Nnf) -> Nnf {
    match n {
        Nnf::And(xs) => {
            let mut out = Vec::new();
            for x in xs.into_iter().map(simplify) {
                match x {
                    Nnf::Const(true) => {}
                    Nnf::Const(false) => return Nnf::Const(false),
                    Nnf::And(ys) => out.extend(ys),
                    x => out.push(x),
                }
            }
            match out.len() {
                0 => Nnf::Const(true),
                1 => out.pop().expect("one"),
                _ => Nnf::And(out),
            }
        }
        Nnf::Or(xs) => {
            let mut out = Vec::new();
            for x in xs.into_iter().map(simplify) {
                match x {
                    Nnf::Const(false) => {}
                    Nnf::Const(true) => return Nnf::Const(true),
                    Nnf::Or(ys) => out.extend(ys),
                    x => out.push(x),
                }
            }
            match out.len() {
                0 => Nnf::Const(false),
                1 => out.pop().expect("one"),
                _ => Nnf::Or(out),
            }
        }
        n => n,
    }
}

fn is_tautology(c: &[Literal]) -> bool {
    c.iter().any(|l| c.contains(&!*l))
}

/// The literals of `n` if it is a single clause.
fn as_clause(n: &Nnf) -> Option<Vec<Literal>> {
    match n {
        Nnf::Const(false) => Some(vec![]),
        Nnf::Lit(l) => Some(vec![*l]),
        Nnf::Or(xs) => xs
            .iter()
            .map(|x| match x {
                Nnf::Lit(l) => Some(*l),
                _ => None,
            })
            .collect(),
        _ => None,
    }
}

/// Clause set by distribution, or `None` past `limit` clauses.
fn distribute(n: &Nnf, limit: usize) -> Option<Vec<Vec<Literal>>> {
    match n {
        Nnf::Const(true) => Some(vec![]),
        Nnf::Const(false) => Some(vec![vec![]]),
        Nnf::Lit(l) => Some(vec![vec![*l]]),
        Nnf::And(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(distribute(x, limit)?);
                if out.len() > limit {
                    return None;
                }
            }
            Some(out)
        }
        Nnf::Or(xs) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for x in xs {
                let part = distribute(x, limit)?;
                if acc.len() * part.len() > limit {
                    return None;
                }
                acc = acc
                    .iter()
                    .flat_map(|a| part.iter().map(move |p| a.iter().chain(p).copied().collect()))
                    .collect();
            }
            Some(acc)
        }
    }
}

struct Tseitin<'a> {
    ctx: &'a mut Context,
    out: Vec<Vec<Literal>>,
}

impl Tseitin<'_> {
    fn emit(&mut self, mut c: Vec<Literal>) {
        c.sort_unstable();
        c.dedup();
        // definitions of subformulas such as (a & !a) contain valid clauses
        if !is_tautology(&c) {
            self.out.push(c);
        }
    }

    /// A literal equivalent to `n`, defining auxiliaries as needed.
    fn name(&mut self, n: &Nnf) -> Literal {
        match n {
            Nnf::Lit(l) => *l,
            Nnf::Const(_) => unreachable!("constants are folded before naming"),
            Nnf::And(xs) | Nnf::Or(xs) => {
                let kids: Vec<Literal> = xs.iter().map(|x| self.name(x)).collect();
                let x = Literal::pos(self.ctx.fresh_aux());
                if matches!(n, Nnf::And(_)) {
                    for k in &kids {
                        self.emit(vec![!x, *k]);
                    }
                    self.emit(std::iter::once(x).chain(kids.iter().map(|k| !*k)).collect());
                } else {
                    for k in &kids {
                        self.emit(vec![x, !*k]);
                    }
                    self.emit(std::iter::once(!x).chain(kids.iter().copied()).collect());
                }
                x
            }
        }
    }

    fn top(&mut self, n: &Nnf) {
        match n {
            Nnf::And(xs) => {
                for x in xs {
                    self.top(x);
                }
            }
            Nnf::Or(xs) => {
                let link: Vec<Literal> = xs.iter().map(|x| self.name(x)).collect();
                self.emit(link);
            }
            Nnf::Lit(l) => self.emit(vec![*l]),
            Nnf::Const(true) => {}
            Nnf::Const(false) => self.out.push(vec![]),
        }
    }
}

/// Clauses for one assertion.
fn convert(ctx: &mut Context, e: &Expr, id: usize, opts: CnfOptions) -> Result<Vec<Vec<Literal>>> {
    // Clause-shaped assertions are kept as written.
    let direct = nnf(e, true);
    if let Some(c) = as_clause(&direct) {
        if is_tautology(&c) {
            return Err(Error::Tautology { assertion: Some(id) });
        }
        return Ok(vec![c]);
    }
    let n = simplify(direct);
    match &n {
        Nnf::Const(true) => return Err(Error::TrivialAssertion(id)),
        Nnf::Const(false) => return Ok(vec![vec![]]),
        _ => {}
    }
    if let Some(c) = as_clause(&n) {
        if is_tautology(&c) {
            return Err(Error::Tautology { assertion: Some(id) });
        }
        return Ok(vec![c]);
    }
    if let Some(cs) = distribute(&n, opts.distribute_limit) {
        if !cs.is_empty() && !cs.iter().any(|c| is_tautology(c)) {
            return Ok(cs);
        }
    }
    let mut t = Tseitin { ctx, out: Vec::new() };
    t.top(&n);
    if t.out.is_empty() {
        return Err(Error::TrivialAssertion(id));
    }
    Ok(t.out)
}

/// Converts every assertion to clauses; each clause records its assertion.
pub fn cnf_convert(set: AssertionSet) -> Result<Formula> {
    cnf_convert_with(set, CnfOptions::default())
}

pub fn cnf_convert_with(set: AssertionSet, opts: CnfOptions) -> Result<Formula> {
    let AssertionSet { mut ctx, assertions, logic, .. } = set;
    let mut clauses = Vec::new();
    for (id, e) in assertions.iter().enumerate() {
        for c in convert(&mut ctx, e, id, opts)? {
            let clause = Clause::new(c, Origin::Original(clauses.len()), Some(id))
                .map_err(|_| Error::Tautology { assertion: Some(id) })?;
            clauses.push(clause);
        }
    }
    Formula::new(ctx, clauses, logic, assertions.len())
}
