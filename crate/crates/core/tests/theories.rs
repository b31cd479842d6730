use lemlift::frontend;
use lemlift::ir::{Atom, Formula, Literal};
use lemlift::theory::{is_valid_lemma, new_solver, EufSolver, LraSolver, TheorySolver, TheoryVerdict, Validity, Witness};
use lemlift::Error;
use lemlift_oracle as oracle;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const XY: &str = "(set-logic QF_LRA) (declare-fun x () Real) (declare-fun y () Real)";
const UF: &str = "(set-logic QF_UF) (declare-sort U 0) (declare-fun a () U) (declare-fun b () U) (declare-fun c () U) (declare-fun f (U) U)";

/// Unit assertions as literals, in order.
fn units(decls: &str, asserts: &[&str]) -> (Formula, Vec<Literal>) {
    let text: String = std::iter::once(decls.to_string()).chain(asserts.iter().map(|a| format!("(assert {a})"))).collect();
    let f = frontend::load(&text).unwrap();
    let lits = f.clauses().iter().map(|c| c.lits()[0]).collect();
    (f, lits)
}

fn sorted(mut v: Vec<Literal>) -> Vec<Literal> {
    v.sort();
    v
}

fn assert_all(s: &mut dyn TheorySolver, f: &Formula, lits: &[Literal]) -> Option<Vec<Literal>> {
    for &l in lits {
        if let Some(c) = s.assert_literal(&f.ctx, l).unwrap() {
            return Some(c);
        }
    }
    None
}

/// Sat/unsat agreement; on conflicts, the same conflict set. Witness values
/// may differ after backtracking.
fn outcome(v: &TheoryVerdict) -> Option<Vec<Literal>> {
    match v {
        TheoryVerdict::Sat(_) => None,
        TheoryVerdict::Conflict(c) => Some(sorted(c.clone())),
    }
}

fn witness_satisfies(f: &Formula, w: &Witness, lits: &[Literal]) -> bool {
    lits.iter().all(|l| w.eval_atom(f.ctx.atoms.get(l.atom)) == Some(l.positive))
}

#[test]
fn lra_strict_bound_conflicts_with_equality() {
    let (f, l) = units(XY, &["(< y 0)", "(= y 1)"]);
    let mut s = LraSolver::new();
    assert!(s.assert_literal(&f.ctx, l[0]).unwrap().is_none());
    let c = s.assert_literal(&f.ctx, l[1]).unwrap().or_else(|| s.check()).expect("conflict");
    assert_eq!(sorted(c), sorted(l));
}

#[test]
fn lra_single_equality_is_consistent() {
    let (f, l) = units(XY, &["(= x 0)"]);
    let mut s = LraSolver::new();
    assert!(assert_all(&mut s, &f, &l).is_none());
    assert!(matches!(s.check_full(), TheoryVerdict::Sat(_)));
}

#[test]
fn lra_witness_respects_disequality() {
    let (f, l) = units(XY, &["(> (+ x y) 3)", "(< y 0)", "(not (= (- x y) 4))"]);
    let mut s = LraSolver::new();
    assert!(assert_all(&mut s, &f, &l).is_none());
    let TheoryVerdict::Sat(w) = s.check_full() else { panic!("expected sat") };
    assert!(witness_satisfies(&f, &w, &l), "{w:?}");
}

#[test]
fn lra_full_check_conflict() {
    let (f, l) = units(XY, &["(= y 2)", "(< y 0)"]);
    let mut s = LraSolver::new();
    let c = match assert_all(&mut s, &f, &l) {
        Some(c) => c,
        None => match s.check_full() {
            TheoryVerdict::Conflict(c) => c,
            v => panic!("{v:?}"),
        },
    };
    assert_eq!(sorted(c), sorted(l));
}

#[test]
fn lra_disequality_squeezed_between_bounds() {
    let (f, l) = units(XY, &["(<= x 1)", "(>= x 1)", "(not (= x 1))"]);
    let mut s = LraSolver::new();
    let c = match assert_all(&mut s, &f, &l) {
        Some(c) => c,
        None => match s.check_full() {
            TheoryVerdict::Conflict(c) => c,
            v => panic!("{v:?}"),
        },
    };
    assert!(!oracle::lra_conjunction_sat(&f.ctx, &c));
}

#[test]
fn euf_transitivity_conflict() {
    let (f, l) = units(UF, &["(= a b)", "(= b c)", "(not (= a c))"]);
    let mut s = EufSolver::new();
    let c = assert_all(&mut s, &f, &l).or_else(|| s.check()).expect("conflict");
    assert_eq!(sorted(c), sorted(l));
}

#[test]
fn euf_congruence_conflict() {
    let (f, l) = units(UF, &["(= (f a) a)", "(not (= (f (f a)) a))"]);
    let mut s = EufSolver::new();
    let c = match assert_all(&mut s, &f, &l) {
        Some(c) => c,
        None => match s.check_full() {
            TheoryVerdict::Conflict(c) => c,
            v => panic!("{v:?}"),
        },
    };
    assert_eq!(sorted(c), sorted(l));
}

#[test]
fn lra_deduces_disequality_from_equality() {
    let (f, l) = units(XY, &["(= x 1)", "(= x 0)"]);
    let mut s = LraSolver::new();
    s.register_atom(&f.ctx, l[1].atom).unwrap();
    assert!(s.deductions().is_empty());
    s.assert_literal(&f.ctx, l[0]).unwrap();
    let d = s.deductions();
    let d = d.iter().find(|d| d.lit.atom == l[1].atom).expect("deduction on x = 0");
    assert_eq!(d.lit, !l[1]);
    assert_eq!(d.explanation, vec![l[0]]);
}

#[test]
fn euf_deduces_by_congruence() {
    let (f, l) = units(UF, &["(= a b)", "(= (f a) (f b))"]);
    let mut s = EufSolver::new();
    s.register_atom(&f.ctx, l[1].atom).unwrap();
    assert!(s.deductions().is_empty());
    s.assert_literal(&f.ctx, l[0]).unwrap();
    let d = s.deductions();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].lit, l[1]);
    assert_eq!(d[0].explanation, vec![l[0]]);
}

#[test]
fn wrong_theory_literal_is_rejected() {
    let (f, l) = units(UF, &["(= a b)"]);
    assert!(matches!(LraSolver::new().assert_literal(&f.ctx, l[0]), Err(Error::WrongTheory(_))));
    let (f, l) = units(XY, &["(< y 0)"]);
    assert!(matches!(EufSolver::new().assert_literal(&f.ctx, l[0]), Err(Error::WrongTheory(_))));
}

fn backtrack_replay(decls: &str, asserts: &[&str], logic_solver: fn() -> Box<dyn TheorySolver>) {
    let (f, l) = units(decls, asserts);
    let mut s = logic_solver();
    let m0 = s.mark();
    s.assert_literal(&f.ctx, l[0]).unwrap();
    let before = s.check_full();
    let m1 = s.mark();
    let _ = assert_all(s.as_mut(), &f, &l[1..]);
    s.backtrack(m1).unwrap();
    assert_eq!(s.asserted(), &l[..1]);
    assert_eq!(outcome(&s.check_full()), outcome(&before));
    assert!(matches!(s.backtrack(m1), Err(Error::StaleMark(_))));
    s.backtrack(m0).unwrap();
    assert!(s.asserted().is_empty());
}

#[test]
fn lra_backtrack_restores_state() {
    backtrack_replay(XY, &["(< y 0)", "(= y 1)"], || Box::new(LraSolver::new()));
}

#[test]
fn euf_backtrack_restores_state() {
    backtrack_replay(UF, &["(= a b)", "(= b c)", "(not (= a c))"], || Box::new(EufSolver::new()));
}

#[test]
fn nested_marks_pop_in_order() {
    let (f, l) = units(XY, &["(<= x 5)", "(>= x 2)", "(< x 3)", "(> x 2)"]);
    let mut s = LraSolver::new();
    let mut marks = Vec::new();
    let mut snaps = Vec::new();
    for &lit in &l {
        marks.push(s.mark());
        snaps.push((s.asserted().to_vec(), s.check_full()));
        s.assert_literal(&f.ctx, lit).unwrap();
    }
    while let Some(m) = marks.pop() {
        s.backtrack(m).unwrap();
        let (asserted, verdict) = snaps.pop().unwrap();
        assert_eq!(s.asserted(), &asserted[..]);
        assert_eq!(outcome(&s.check_full()), outcome(&verdict));
    }
}

#[test]
fn lemma_validity() {
    let phi = format!("{XY} (declare-fun A1 () Bool)");
    let (f, _) = units(
        &phi,
        &[
            "(or (not (= y 1)) (not (< y 0)))",
            "(or (not (= x 1)) (not (= x 0)))",
            "(or (not (= y 2)) (not (< y 0)))",
            "(or (= x 0) (= x 1))",
        ],
    );
    for i in 0..3 {
        assert_eq!(is_valid_lemma(&f.ctx, f.clause(i).lits()).unwrap(), Validity::Valid);
    }
    let x0 = f.clause(3).lits()[0];
    assert_eq!(is_valid_lemma(&f.ctx, &[x0, !x0]).unwrap(), Validity::Valid);
    let Validity::Invalid(w) = is_valid_lemma(&f.ctx, f.clause(3).lits()).unwrap() else { panic!() };
    assert!(witness_satisfies(&f, &w, &f.clause(3).lits().iter().map(|l| !*l).collect::<Vec<_>>()));
}

#[test]
fn mixed_theory_lemma_is_an_error() {
    let mut ctx = lemlift::ir::Context::new();
    let (fl, _) = units(XY, &["(< y 0)"]);
    let (fu, _) = units(UF, &["(= a b)"]);
    // splice the two contexts: rebuild both atoms in one context
    ctx.sig = fl.ctx.sig.clone();
    let lin = ctx.intern_atom(fl.ctx.atoms.get(lemlift::ir::AtomId(0)).clone()).unwrap();
    let u = ctx.sig.declare_sort("U").unwrap();
    let a = ctx.sig.declare("a", vec![], u).unwrap();
    let b = ctx.sig.declare("b", vec![], u).unwrap();
    let (lemlift::ir::Symbol::Fun(a), lemlift::ir::Symbol::Fun(b)) = (a, b) else { panic!() };
    let ta = ctx.terms.mk_app(&ctx.sig, a, vec![]).unwrap();
    let tb = ctx.terms.mk_app(&ctx.sig, b, vec![]).unwrap();
    let eq = ctx.intern_atom(Atom::Eq(ta, tb)).unwrap();
    let _ = fu;
    assert!(is_valid_lemma(&ctx, &[Literal::pos(lin), Literal::pos(eq)]).is_err());
}

fn random_conjunction(rng: &mut StdRng, euf: bool) -> (Formula, Vec<Literal>) {
    let n = rng.gen_range(1..=8);
    let script = if euf {
        oracle::random_euf_script(rng, 3, n, n, 1)
    } else {
        oracle::random_lra_script(rng, 3, n, n, 1)
    };
    let f = oracle::load_lenient(&script).unwrap_or_else(|| frontend::load(XY).unwrap());
    let lits = f.clauses().iter().filter_map(|c| c.lits().first().copied()).collect();
    (f, lits)
}

fn check_against_oracle(euf: bool, seeds: u64) {
    for seed in 0..seeds {
        let mut rng = StdRng::seed_from_u64(seed);
        let (f, lits) = random_conjunction(&mut rng, euf);
        let mut s = new_solver(f.logic());
        let expected = oracle::theory_conjunction_sat(&f.ctx, &lits);
        let verdict = match assert_all(s.as_mut(), &f, &lits) {
            Some(c) => TheoryVerdict::Conflict(c),
            None => s.check_full(),
        };
        match verdict {
            TheoryVerdict::Sat(w) => {
                assert!(expected, "seed {seed}: solver says sat, oracle unsat");
                assert!(witness_satisfies(&f, &w, &lits), "seed {seed}: bad witness {w:?}");
            }
            TheoryVerdict::Conflict(c) => {
                assert!(!expected, "seed {seed}: solver says unsat, oracle sat");
                assert!(c.iter().all(|l| lits.contains(l)), "seed {seed}: conflict not asserted");
                assert!(!oracle::theory_conjunction_sat(&f.ctx, &c), "seed {seed}: conflict is consistent");
            }
        }
    }
}

#[test]
fn lra_agrees_with_fourier_motzkin() {
    check_against_oracle(false, 1500);
}

#[test]
fn euf_agrees_with_naive_closure() {
    check_against_oracle(true, 1000);
}

#[test]
fn deductions_are_entailed() {
    for seed in 0..400u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let euf = seed % 2 == 0;
        let (f, lits) = random_conjunction(&mut rng, euf);
        let mut s = new_solver(f.logic());
        for (id, _) in f.ctx.atoms.iter() {
            s.register_atom(&f.ctx, id).unwrap();
        }
        let k = rng.gen_range(0..=lits.len());
        if assert_all(s.as_mut(), &f, &lits[..k]).is_some() || s.check().is_some() {
            continue;
        }
        for d in s.deductions() {
            assert!(!s.asserted().iter().any(|l| l.atom == d.lit.atom), "seed {seed}: deduced an assigned atom");
            assert!(d.explanation.iter().all(|l| lits[..k].contains(l)), "seed {seed}");
            let mut probe = d.explanation.clone();
            probe.push(!d.lit);
            assert!(!oracle::theory_conjunction_sat(&f.ctx, &probe), "seed {seed}: {d:?} not entailed");
        }
    }
}

#[test]
fn random_backtracking_replays() {
    for seed in 0..300u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let (f, lits) = random_conjunction(&mut rng, seed % 2 == 1);
        let mut s = new_solver(f.logic());
        let mut stack: Vec<(lemlift::theory::Mark, Vec<Literal>, TheoryVerdict)> = Vec::new();
        for &l in &lits {
            if rng.gen_bool(0.3) && !stack.is_empty() {
                let (m, asserted, verdict) = stack.pop().unwrap();
                s.backtrack(m).unwrap();
                assert_eq!(s.asserted(), &asserted[..]);
                assert_eq!(outcome(&s.check_full()), outcome(&verdict), "seed {seed}");
            }
            let m = s.mark();
            stack.push((m, s.asserted().to_vec(), s.check_full()));
            let _ = s.assert_literal(&f.ctx, l).unwrap();
        }
        while let Some((m, asserted, verdict)) = stack.pop() {
            s.backtrack(m).unwrap();
            assert_eq!(s.asserted(), &asserted[..]);
            assert_eq!(outcome(&s.check_full()), outcome(&verdict), "seed {seed}");
        }
    }
}
