use lemlift::frontend;
use lemlift::ir::{Formula, Literal};
use lemlift::sat::{sat_solve, SatVerdict};
use lemlift::smt::{smt_solve, SmtOptions, SmtSolver, SmtVerdict, TLemmaKind};
use lemlift::theory::{is_valid_lemma, Validity};
use lemlift_oracle as oracle;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn corpus(name: &str) -> Formula {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    frontend::load(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn option_grid() -> Vec<SmtOptions> {
    let mut out = Vec::new();
    for (early_pruning, theory_propagation) in [(true, true), (true, false), (false, false)] {
        for seed in [None, Some(7)] {
            out.push(SmtOptions { early_pruning, theory_propagation, seed, ..SmtOptions::default() });
        }
    }
    out
}

/// Facts (i) and (ii) for one unsatisfiable run.
fn check_facts(f: &Formula, lemmas: &[Vec<Literal>]) {
    for l in lemmas {
        assert_eq!(is_valid_lemma(&f.ctx, l).unwrap(), Validity::Valid, "{}", f.ctx.display_clause(l));
    }
    let mut cnf: Vec<_> = (0..f.len()).map(|i| f.abstract_clause(i)).collect();
    cnf.extend(lemmas.iter().map(|l| f.ctx.t2p(l)));
    assert_eq!(sat_solve(&cnf, &[], false).verdict, SatVerdict::Unsat);
}

#[test]
fn example1_is_unsat_with_valid_lemmas() {
    let f = corpus("example1.smt2");
    assert_eq!(f.len(), 9);
    for opts in option_grid() {
        let run = smt_solve(&f, &opts).unwrap();
        assert_eq!(run.verdict, SmtVerdict::Unsat);
        assert!(!run.lemmas.is_empty());
        check_facts(&f, &run.lemmas.clauses());
        let abs: Vec<_> = (0..f.len()).map(|i| f.abstract_clause(i)).collect();
        assert!(sat_solve(&abs, &[], false).verdict.is_sat(), "the abstraction alone is satisfiable");
    }
}

#[test]
fn single_strict_bound_is_sat() {
    let f = corpus("sat_unit.smt2");
    let SmtVerdict::Sat(m) = smt_solve(&f, &SmtOptions::default()).unwrap().verdict else { panic!() };
    assert!(f.clauses().iter().all(|c| m.satisfies(&f.ctx, c.lits())));
}

#[test]
fn example5_needs_no_lemma() {
    let f = corpus("example5.smt2");
    let run = smt_solve(&f, &SmtOptions::default()).unwrap();
    assert_eq!(run.verdict, SmtVerdict::Unsat);
    check_facts(&f, &run.lemmas.clauses());
}

#[test]
fn contradictory_equalities_store_their_lemma() {
    let f = frontend::load("(declare-fun x () Real) (assert (= x 1)) (assert (= x 0))").unwrap();
    let (x1, x0) = (f.clause(0).lits()[0], f.clause(1).lits()[0]);
    for opts in option_grid() {
        let run = smt_solve(&f, &opts).unwrap();
        assert!(run.verdict.is_unsat());
        let mut want = vec![!x1, !x0];
        want.sort();
        assert!(run.lemmas.iter().any(|l| l.lits == want), "{:?}", run.lemmas);
    }
}

#[test]
fn stored_lemmas_reach_the_engine_in_order() {
    let f = corpus("example1.smt2");
    let mut s = SmtSolver::for_formula(&f, SmtOptions::default()).unwrap();
    assert!(s.solve(&[]).unwrap().is_unsat());
    for (i, l) in s.lemmas().iter().enumerate() {
        assert_eq!(l.seq, i);
        assert!(matches!(l.kind, TLemmaKind::Conflict | TLemmaKind::Deduction));
    }
}

#[test]
fn corpus_verdicts_match_oracle() {
    let dir = format!("{}/../../corpus", env!("CARGO_MANIFEST_DIR"));
    let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names {
        let f = corpus(name.to_str().unwrap());
        let all: Vec<usize> = (0..f.len()).collect();
        let expected = oracle::smt_sat(&f, &all);
        for opts in option_grid() {
            let run = smt_solve(&f, &opts).unwrap();
            assert_eq!(run.verdict.is_sat(), expected, "{name:?}");
            match run.verdict {
                SmtVerdict::Sat(m) => assert!(f.clauses().iter().all(|c| m.satisfies(&f.ctx, c.lits()))),
                _ => check_facts(&f, &run.lemmas.clauses()),
            }
        }
    }
}

fn random_formula(rng: &mut StdRng, euf: bool) -> Option<Formula> {
    let atoms = rng.gen_range(2..=6);
    let clauses = rng.gen_range(2..=8);
    let script = if euf {
        oracle::random_euf_script(rng, 3, atoms, clauses, 3)
    } else {
        oracle::random_lra_script(rng, 3, atoms, clauses, 3)
    };
    oracle::load_lenient(&script)
}

fn random_agreement(euf: bool) {
    let (mut sat, mut unsat) = (0, 0);
    for seed in 0..700u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let Some(f) = random_formula(&mut rng, euf) else { continue };
        let all: Vec<usize> = (0..f.len()).collect();
        let expected = oracle::smt_sat(&f, &all);
        let opts = &option_grid()[seed as usize % 6];
        let run = smt_solve(&f, opts).unwrap();
        assert_eq!(run.verdict.is_sat(), expected, "seed {seed}");
        match run.verdict {
            SmtVerdict::Sat(m) => {
                sat += 1;
                assert!(f.clauses().iter().all(|c| m.satisfies(&f.ctx, c.lits())), "seed {seed}");
            }
            _ => {
                unsat += 1;
                check_facts(&f, &run.lemmas.clauses());
            }
        }
    }
    assert!(sat > 100 && unsat > 100, "sat {sat} unsat {unsat}");
}

#[test]
fn random_lra_agrees_with_oracle() {
    random_agreement(false);
}

#[test]
fn random_euf_agrees_with_oracle() {
    random_agreement(true);
}

fn pigeonhole(holes: usize) -> String {
    let p = |i: usize, j: usize| format!("p{i}_{j}");
    let mut s = String::new();
    for i in 0..=holes {
        for j in 0..holes {
            s += &format!("(declare-fun {} () Bool)", p(i, j));
        }
        s += &format!("(assert (or {}))", (0..holes).map(|j| p(i, j)).collect::<Vec<_>>().join(" "));
    }
    for j in 0..holes {
        for i in 0..=holes {
            for k in i + 1..=holes {
                s += &format!("(assert (or (not {}) (not {})))", p(i, j), p(k, j));
            }
        }
    }
    s
}

#[test]
fn budget_gives_unknown() {
    let f = frontend::load(&pigeonhole(6)).unwrap();
    let run = smt_solve(&f, &SmtOptions { conflict_budget: Some(5), ..SmtOptions::default() }).unwrap();
    assert_eq!(run.verdict, SmtVerdict::Unknown);
    assert!(smt_solve(&f, &SmtOptions::default()).unwrap().verdict.is_unsat());
}

#[test]
fn incremental_solving_with_selectors() {
    let f = corpus("example1.smt2");
    let mut s = SmtSolver::new(&f.ctx, f.logic(), SmtOptions::default());
    let sel: Vec<_> = (0..f.len()).map(|_| s.new_var()).collect();
    for (i, c) in f.clauses().iter().enumerate() {
        s.add_clause(c.lits(), &[!sel[i]]).unwrap();
    }
    let SmtVerdict::UnsatAssumptions(core) = s.solve(&sel).unwrap() else { panic!() };
    assert!(core.iter().all(|l| sel.contains(&!*l)));
    // dropping c6 (y < 0) restores satisfiability
    let mut without = sel.clone();
    without.remove(5);
    assert!(s.solve(&without).unwrap().is_sat());
    assert!(s.solve(&sel).unwrap().is_unsat());
}
