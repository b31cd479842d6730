//! Reference deciders for tests: truth tables, Fourier-Motzkin elimination
//! with case splits on disequalities, naive congruence closure, and a
//! brute-force SMT decider built from them. Also random instance generators.
//!
//! Everything here is deliberately simple and slow. None of it shares code
//! with the solvers it checks beyond the term and atom representation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use lemlift::frontend;
use lemlift::ir::{Atom, Context, Formula, Literal, Rational, RealVar, Rel, TermId};
use num_traits::{Signed, Zero};
use rand::Rng;

/// A satisfying assignment of `clauses` (DIMACS literals over `1..=num_vars`)
/// by enumeration, if there is one.
pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<i32>]) -> Option<Vec<bool>> {
    assert!(num_vars <= 24, "truth table too large");
    (0u32..1 << num_vars).find_map(|bits| {
        let val = |d: i32| ((bits >> (d.unsigned_abs() - 1)) & 1 == 1) == (d > 0);
        clauses
            .iter()
            .all(|c| c.iter().any(|&d| val(d)))
            .then(|| (0..num_vars).map(|v| bits >> v & 1 == 1).collect())
    })
}

/// Every minimal unsatisfiable subset of `clauses`, by subset enumeration.
pub fn all_muses_by_enumeration(n: usize, unsat: impl Fn(&[usize]) -> bool) -> Vec<Vec<usize>> {
    assert!(n <= 16, "too many clauses to enumerate");
    let mut out = Vec::new();
    for bits in 0u32..1 << n {
        let s: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        if unsat(&s) && s.iter().all(|&c| !unsat(&without(&s, c))) {
            out.push(s);
        }
    }
    out.sort();
    out
}

/// Every minimal correction subset, by subset enumeration.
pub fn all_mcses_by_enumeration(n: usize, unsat: impl Fn(&[usize]) -> bool) -> Vec<Vec<usize>> {
    assert!(n <= 16, "too many clauses to enumerate");
    let all: Vec<usize> = (0..n).collect();
    let rest = |s: &[usize]| all.iter().copied().filter(|i| !s.contains(i)).collect::<Vec<_>>();
    let mut out = Vec::new();
    for bits in 0u32..1 << n {
        let s: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        if !unsat(&rest(&s)) && s.iter().all(|&c| unsat(&rest(&without(&s, c)))) {
            out.push(s);
        }
    }
    out.sort();
    out
}

fn without(s: &[usize], c: usize) -> Vec<usize> {
    s.iter().copied().filter(|&x| x != c).collect()
}

/// `sum coeffs * x + constant  op  0`, with `Ne` for disequalities.
#[derive(Clone, Debug)]
struct Constraint {
    coeffs: BTreeMap<RealVar, Rational>,
    constant: Rational,
    op: Op,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Op {
    Le,
    Lt,
    Eq,
    Ne,
}

impl Constraint {
    fn of_literal(ctx: &Context, l: Literal) -> Option<Constraint> {
        let Atom::Linear(a) = ctx.atoms.get(l.atom) else {
            return None;
        };
        let coeffs = a.coeffs().iter().map(|(v, c)| (*v, Rational::from_integer(c.clone()))).collect();
        let c = Constraint { coeffs, constant: Rational::from_integer(a.constant().clone()), op: Op::Eq };
        Some(match (a.rel(), l.positive) {
            (Rel::Le, true) => Constraint { op: Op::Le, ..c },
            (Rel::Lt, true) => Constraint { op: Op::Lt, ..c },
            (Rel::Eq, true) => c,
            (Rel::Eq, false) => Constraint { op: Op::Ne, ..c },
            // not (e <= 0) is -e < 0; not (e < 0) is -e <= 0
            (Rel::Le, false) => Constraint { op: Op::Lt, ..c.negated() },
            (Rel::Lt, false) => Constraint { op: Op::Le, ..c.negated() },
        })
    }

    fn negated(self) -> Constraint {
        Constraint {
            coeffs: self.coeffs.into_iter().map(|(v, c)| (v, -c)).collect(),
            constant: -self.constant,
            op: self.op,
        }
    }
}

/// Fourier-Motzkin over `Le`/`Lt` constraints only.
fn fm_feasible(mut cs: Vec<Constraint>) -> bool {
    loop {
        let Some(x) = cs.iter().find_map(|c| c.coeffs.keys().next().copied()) else {
            return cs.iter().all(|c| match c.op {
                Op::Le => !c.constant.is_positive(),
                Op::Lt => c.constant.is_negative(),
                _ => unreachable!(),
            });
        };
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in cs {
            match c.coeffs.get(&x).map(|a| a.is_positive()) {
                Some(true) => pos.push(c),
                Some(false) => neg.push(c),
                None => rest.push(c),
            }
        }
        for p in &pos {
            for n in &neg {
                // scale so that x cancels: p / a_p + n / |a_n|
                let (ap, an) = (p.coeffs[&x].clone(), -n.coeffs[&x].clone());
                let mut coeffs: BTreeMap<RealVar, Rational> = BTreeMap::new();
                for (v, c) in &p.coeffs {
                    *coeffs.entry(*v).or_insert_with(Rational::zero) += c / &ap;
                }
                for (v, c) in &n.coeffs {
                    *coeffs.entry(*v).or_insert_with(Rational::zero) += c / &an;
                }
                coeffs.retain(|_, c| !c.is_zero());
                let op = if p.op == Op::Lt || n.op == Op::Lt { Op::Lt } else { Op::Le };
                rest.push(Constraint { coeffs, constant: &p.constant / &ap + &n.constant / &an, op });
            }
        }
        cs = rest;
    }
}

/// Satisfiability of a conjunction of LRA literals by Fourier-Motzkin,
/// splitting every disequality into its two strict sides.
pub fn lra_conjunction_sat(ctx: &Context, lits: &[Literal]) -> bool {
    let mut base = Vec::new();
    let mut splits = Vec::new();
    for &l in lits {
        let c = Constraint::of_literal(ctx, l).expect("linear literal");
        match c.op {
            Op::Eq => {
                base.push(Constraint { op: Op::Le, ..c.clone() });
                base.push(Constraint { op: Op::Le, ..c.negated() });
            }
            Op::Ne => splits.push(c),
            _ => base.push(c),
        }
    }
    (0u32..1 << splits.len()).any(|bits| {
        let mut cs = base.clone();
        for (i, c) in splits.iter().enumerate() {
            let c = Constraint { op: Op::Lt, ..c.clone() };
            cs.push(if bits >> i & 1 == 1 { c.negated() } else { c });
        }
        fm_feasible(cs)
    })
}

/// Satisfiability of a conjunction of EUF literals by a naive congruence
/// closure fixpoint over all subterms.
pub fn euf_conjunction_sat(ctx: &Context, lits: &[Literal]) -> bool {
    let mut terms = BTreeSet::new();
    fn collect(ctx: &Context, t: TermId, out: &mut BTreeSet<TermId>) {
        if out.insert(t) {
            for a in &ctx.terms.app(t).args {
                collect(ctx, *a, out);
            }
        }
    }
    let sides = |l: &Literal| match ctx.atoms.get(l.atom) {
        Atom::Eq(a, b) => (*a, *b),
        other => panic!("not an equality: {other:?}"),
    };
    for l in lits {
        let (a, b) = sides(l);
        collect(ctx, a, &mut terms);
        collect(ctx, b, &mut terms);
    }
    let terms: Vec<TermId> = terms.into_iter().collect();
    let mut class: BTreeMap<TermId, TermId> = terms.iter().map(|t| (*t, *t)).collect();
    let merge = |class: &mut BTreeMap<TermId, TermId>, a: TermId, b: TermId| -> bool {
        let (ca, cb) = (class[&a], class[&b]);
        if ca == cb {
            return false;
        }
        for v in class.values_mut() {
            if *v == cb {
                *v = ca;
            }
        }
        true
    };
    for l in lits.iter().filter(|l| l.positive) {
        let (a, b) = sides(l);
        merge(&mut class, a, b);
    }
    loop {
        let mut changed = false;
        for &s in &terms {
            for &t in &terms {
                let (x, y) = (ctx.terms.app(s), ctx.terms.app(t));
                if x.fun == y.fun
                    && !x.args.is_empty()
                    && x.args.iter().zip(&y.args).all(|(p, q)| class[p] == class[q])
                {
                    changed |= merge(&mut class, s, t);
                }
            }
        }
        if !changed {
            break;
        }
    }
    lits.iter().filter(|l| !l.positive).all(|l| {
        let (a, b) = sides(l);
        class[&a] != class[&b]
    })
}

/// Theory satisfiability of a conjunction of literals; propositional
/// literals only need to be mutually consistent.
pub fn theory_conjunction_sat(ctx: &Context, lits: &[Literal]) -> bool {
    if lits.iter().any(|l| lits.contains(&!*l)) {
        return false;
    }
    let lin: Vec<Literal> = lits.iter().copied().filter(|l| matches!(ctx.atoms.get(l.atom), Atom::Linear(_))).collect();
    let eq: Vec<Literal> = lits.iter().copied().filter(|l| matches!(ctx.atoms.get(l.atom), Atom::Eq(..))).collect();
    lra_conjunction_sat(ctx, &lin) && euf_conjunction_sat(ctx, &eq)
}

/// Theory satisfiability of the clauses of `formula` at `indices`, by
/// enumerating assignments to their atoms with clause-level pruning.
pub fn smt_sat(formula: &Formula, indices: &[usize]) -> bool {
    let clauses: Vec<&[Literal]> = indices.iter().map(|&i| formula.clause(i).lits()).collect();
    let atoms: Vec<_> = clauses
        .iter()
        .flat_map(|c| c.iter().map(|l| l.atom))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(atoms.len() <= 22, "too many atoms to enumerate");
    let mut chosen = Vec::new();
    search(&formula.ctx, &clauses, &atoms, &mut chosen)
}

fn search(ctx: &Context, clauses: &[&[Literal]], atoms: &[lemlift::ir::AtomId], chosen: &mut Vec<Literal>) -> bool {
    let falsified = clauses.iter().any(|c| c.iter().all(|l| chosen.contains(&!*l)));
    if falsified || !theory_conjunction_sat(ctx, chosen) {
        return false;
    }
    let Some(&a) = atoms.get(chosen.len()) else {
        return true;
    };
    for pol in [true, false] {
        chosen.push(Literal::new(a, pol));
        if search(ctx, clauses, atoms, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Theory unsatisfiability of the clauses at `indices`.
pub fn smt_unsat(formula: &Formula, indices: &[usize]) -> bool {
    !smt_sat(formula, indices)
}

/// `indices` is unsatisfiable and every one-clause deletion is satisfiable.
pub fn is_minimal_core(formula: &Formula, indices: &[usize]) -> bool {
    smt_unsat(formula, indices) && indices.iter().all(|&c| smt_sat(formula, &without(indices, c)))
}

/// Random LRA script: `vars` real variables, `atoms` distinct atoms, and
/// `clauses` clauses of 1 to `width` literals.
pub fn random_lra_script(rng: &mut impl Rng, vars: usize, atoms: usize, clauses: usize, width: usize) -> String {
    let mut s = String::from("(set-logic QF_LRA)\n");
    for v in 0..vars {
        writeln!(s, "(declare-fun x{v} () Real)").unwrap();
    }
    let pool: Vec<String> = (0..atoms).map(|_| random_linear_atom(rng, vars)).collect();
    write_clauses(rng, &mut s, &pool, clauses, width, 0.5);
    s
}

/// A random linear atom over `x0..x{vars-1}` with small integer data.
pub fn random_linear_atom(rng: &mut impl Rng, vars: usize) -> String {
    let n = rng.gen_range(1..=vars.min(2));
    let mut terms = Vec::new();
    let mut used = BTreeSet::new();
    for _ in 0..n {
        let v = rng.gen_range(0..vars);
        if !used.insert(v) {
            continue;
        }
        let c: i32 = [-2, -1, 1, 1, 2, 3][rng.gen_range(0..6)];
        terms.push(if c == 1 { format!("x{v}") } else { format!("(* {} x{v})", num(c)) });
    }
    let lhs = if terms.len() == 1 { terms.pop().unwrap() } else { format!("(+ {})", terms.join(" ")) };
    let rel = ["<=", "<", "=", ">=", ">"][rng.gen_range(0..5)];
    format!("({rel} {lhs} {})", num(rng.gen_range(-3..=3)))
}

fn num(c: i32) -> String {
    if c < 0 {
        format!("(- {})", -c)
    } else {
        c.to_string()
    }
}

/// Random EUF script over constants `a0..` of sort U and one unary and one
/// binary function.
pub fn random_euf_script(rng: &mut impl Rng, consts: usize, atoms: usize, clauses: usize, width: usize) -> String {
    euf_script(rng, consts, atoms, clauses, width, 2, 0.5)
}

/// Knobs for [`random_flat_euf_script`].
#[derive(Clone, Copy, Debug)]
pub struct EufShape {
    pub consts: usize,
    pub atoms: usize,
    pub clauses: usize,
    pub width: usize,
    /// Probability that a literal is a positive equality.
    pub positive: f64,
}

/// EUF script whose terms have depth at most one and whose literals lean
/// positive, which makes conflicts that need congruence far more common.
pub fn random_flat_euf_script(rng: &mut impl Rng, shape: EufShape) -> String {
    euf_script(rng, shape.consts, shape.atoms, shape.clauses, shape.width, 1, shape.positive)
}

fn euf_script(rng: &mut impl Rng, consts: usize, atoms: usize, clauses: usize, width: usize, depth: u32, positive: f64) -> String {
    let mut s = String::from("(set-logic QF_UF)\n(declare-sort U 0)\n(declare-fun f (U) U)\n(declare-fun g (U U) U)\n");
    for c in 0..consts {
        writeln!(s, "(declare-fun a{c} () U)").unwrap();
    }
    let pool: Vec<String> = (0..atoms)
        .map(|_| format!("(= {} {})", random_term(rng, consts, depth), random_term(rng, consts, depth)))
        .collect();
    write_clauses(rng, &mut s, &pool, clauses, width, positive);
    s
}

fn random_term(rng: &mut impl Rng, consts: usize, depth: u32) -> String {
    match if depth == 0 { 0 } else { rng.gen_range(0..5) } {
        0..=2 => format!("a{}", rng.gen_range(0..consts)),
        3 => format!("(f {})", random_term(rng, consts, depth - 1)),
        _ => format!("(g {} {})", random_term(rng, consts, depth - 1), random_term(rng, consts, depth - 1)),
    }
}

fn write_clauses(rng: &mut impl Rng, s: &mut String, pool: &[String], clauses: usize, width: usize, positive: f64) {
    for _ in 0..clauses {
        let k = rng.gen_range(1..=width);
        let lits: Vec<String> = (0..k)
            .map(|_| {
                let a = &pool[rng.gen_range(0..pool.len())];
                if rng.gen_bool(positive) {
                    a.clone()
                } else {
                    format!("(not {a})")
                }
            })
            .collect();
        if lits.len() == 1 {
            writeln!(s, "(assert {})", lits[0]).unwrap();
        } else {
            writeln!(s, "(assert (or {}))", lits.join(" ")).unwrap();
        }
    }
}

/// Parses a random script, skipping assertions the converter rejects as
/// tautological or trivial. Returns `None` if nothing is left.
pub fn load_lenient(text: &str) -> Option<Formula> {
    let mut set = frontend::parse(text).expect("generated scripts parse");
    let exprs = std::mem::take(&mut set.assertions);
    let mut kept = Vec::new();
    for e in exprs {
        let mut probe = set.clone();
        probe.assertions = vec![e.clone()];
        if frontend::cnf_convert(probe).is_ok() {
            kept.push(e);
        }
    }
    if kept.is_empty() {
        return None;
    }
    set.assertions = kept;
    Some(frontend::cnf_convert(set).expect("filtered assertions convert"))
}

/// A random CNF over `vars` variables as DIMACS literal rows.
pub fn random_cnf(rng: &mut impl Rng, vars: usize, clauses: usize, width: usize) -> Vec<Vec<i32>> {
    (0..clauses)
        .map(|_| {
            let mut c: Vec<i32> = Vec::new();
            for _ in 0..rng.gen_range(1..=width) {
                let v = rng.gen_range(1..=vars as i32);
                let d = if rng.gen_bool(0.5) { v } else { -v };
                if !c.contains(&d) && !c.contains(&-d) {
                    c.push(d);
                }
            }
            c
        })
        .collect()
}
