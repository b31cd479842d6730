//! Propositional engine: CDCL search with resolution-proof logging and
//! assumption solving.

mod heap;
pub mod proof;
mod solver;
mod types;

pub use proof::{check_proof, proof_core, resolve, NodeId, ProofLog, ProofNode};
pub use solver::{
    ClauseRef, ClauseSource, NoTheory, SatVerdict, Solver, SolverConfig, SolverStats, Theory, TheoryLemma,
};
pub use types::{LBool, Lit, Var};

/// Result of [`sat_solve`]: the verdict plus the proof when one was logged.
#[derive(Debug)]
pub struct SatRun {
    pub verdict: SatVerdict,
    pub proof: Option<ProofLog>,
}

fn max_var(clauses: &[Vec<Lit>], extra: &[Lit]) -> usize {
    clauses.iter().flatten().chain(extra).map(|l| l.var().index() + 1).max().unwrap_or(0)
}

/// Solves `clauses` under `assumptions`. Proof leaves name clauses by their
/// position in `clauses`.
///
/// ```
/// use lemlift::sat::{sat_solve, proof_core, Lit};
///
/// let cnf: Vec<Vec<Lit>> = [[1].as_slice(), &[-1], &[2]]
///     .iter()
///     .map(|c| c.iter().map(|&x| Lit::from_dimacs(x)).collect())
///     .collect();
/// let run = sat_solve(&cnf, &[], true);
/// assert!(run.verdict.is_unsat());
/// assert_eq!(proof_core(run.proof.as_ref().unwrap()).unwrap(), vec![0, 1]);
/// ```
pub fn sat_solve(clauses: &[Vec<Lit>], assumptions: &[Lit], log_proof: bool) -> SatRun {
    sat_solve_with(clauses, assumptions, SolverConfig { log_proof, ..SolverConfig::default() })
}

pub fn sat_solve_with(clauses: &[Vec<Lit>], assumptions: &[Lit], cfg: SolverConfig) -> SatRun {
    let mut s = Solver::new(cfg);
    s.reserve_vars(max_var(clauses, assumptions));
    for c in clauses {
        s.add_clause(c);
    }
    let verdict = s.solve_assuming(assumptions);
    let proof = match verdict {
        SatVerdict::Unsat => s.take_proof(),
        _ => None,
    };
    SatRun { verdict, proof }
}

/// Assumption-based core: clause `i` becomes `!s_i | C_i` for a fresh
/// selector `s_i`, all selectors are assumed, and the core is read off the
/// final conflict clause. Returns the verdict and, on unsat, the core.
pub fn solve_with_selectors(clauses: &[Vec<Lit>]) -> (SatVerdict, Option<Vec<usize>>) {
    let base = max_var(clauses, &[]);
    let mut s = Solver::default();
    s.reserve_vars(base + clauses.len());
    let selectors: Vec<Lit> = (0..clauses.len()).map(|i| Var((base + i) as u32).lit(true)).collect();
    for (c, sel) in clauses.iter().zip(&selectors) {
        let mut lits = c.clone();
        lits.push(!*sel);
        s.add_clause(&lits);
    }
    let verdict = s.solve_assuming(&selectors);
    let core = match &verdict {
        SatVerdict::UnsatAssumptions(conflict) => {
            let mut core: Vec<usize> = conflict.iter().map(|l| l.var().index() - base).collect();
            core.sort_unstable();
            Some(core)
        }
        // Unsat without assumptions: only possible when the solver proved
        // the selector-guarded set unsat outright, i.e. never for nonempty
        // selector sets; fall back to all clauses.
        SatVerdict::Unsat => Some((0..clauses.len()).collect()),
        _ => None,
    };
    (verdict, core)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(rows: &[&[i32]]) -> Vec<Vec<Lit>> {
        rows.iter().map(|c| c.iter().map(|&x| Lit::from_dimacs(x)).collect()).collect()
    }

    fn brute(clauses: &[Vec<Lit>], n: usize) -> bool {
        (0u32..1 << n).any(|m| {
            clauses.iter().all(|c| c.iter().any(|l| ((m >> l.var().0) & 1 == 1) == l.is_positive()))
        })
    }

    #[test]
    fn contradictory_units_resolve_once() {
        let f = cnf(&[&[1], &[-1]]);
        let run = sat_solve(&f, &[], true);
        assert_eq!(run.verdict, SatVerdict::Unsat);
        let p = run.proof.unwrap();
        check_proof(&p, &f).unwrap();
        let resolvents = p.nodes().iter().filter(|n| matches!(n, ProofNode::Resolvent { .. })).count();
        assert_eq!(resolvents, 1);
        assert_eq!(proof_core(&p).unwrap(), vec![0, 1]);
    }

    #[test]
    fn empty_input_clause_is_a_one_leaf_proof() {
        let f = cnf(&[&[1, 2], &[]]);
        let run = sat_solve(&f, &[], true);
        let p = run.proof.unwrap();
        check_proof(&p, &f).unwrap();
        assert_eq!(proof_core(&p).unwrap(), vec![1]);
    }

    #[test]
    fn satisfiable_model_checks() {
        let f = cnf(&[&[1, 2]]);
        let SatVerdict::Sat(m) = sat_solve(&f, &[], false).verdict else { panic!() };
        assert!(m[0] || m[1]);
    }

    #[test]
    fn selectors_name_the_core() {
        let f = cnf(&[&[1], &[2], &[-1]]);
        let (v, core) = solve_with_selectors(&f);
        assert!(v.is_unsat());
        assert_eq!(core.unwrap(), vec![0, 2]);
        let (v, core) = solve_with_selectors(&[]);
        assert!(v.is_sat() && core.is_none());
    }

    #[test]
    fn assumption_conflict_uses_only_assumptions() {
        let f = cnf(&[&[-1, 3], &[-2, -3]]);
        let mut s = Solver::default();
        for c in &f {
            s.add_clause(c);
        }
        let a = [Lit::from_dimacs(1), Lit::from_dimacs(2)];
        let SatVerdict::UnsatAssumptions(c) = s.solve_assuming(&a) else { panic!() };
        let mut c: Vec<i32> = c.iter().map(|l| l.to_dimacs()).collect();
        c.sort();
        assert_eq!(c, vec![-2, -1]);
        assert!(s.solve_assuming(&a[..1]).is_sat());
    }

    #[test]
    fn budget_gives_unknown() {
        // Pigeonhole 5 into 4 needs many conflicts.
        let p = |i: i32, j: i32| i * 4 + j + 1;
        let mut rows: Vec<Vec<i32>> = (0..5).map(|i| (0..4).map(|j| p(i, j)).collect()).collect();
        for j in 0..4 {
            for a in 0..5 {
                for b in a + 1..5 {
                    rows.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let f: Vec<Vec<Lit>> = rows.iter().map(|c| c.iter().map(|&x| Lit::from_dimacs(x)).collect()).collect();
        let cfg = SolverConfig { conflict_budget: Some(3), ..SolverConfig::default() };
        assert_eq!(sat_solve_with(&f, &[], cfg).verdict, SatVerdict::Unknown);
        let run = sat_solve(&f, &[], true);
        assert_eq!(run.verdict, SatVerdict::Unsat);
        check_proof(run.proof.as_ref().unwrap(), &f).unwrap();
    }

    #[test]
    fn random_small_against_truth_table() {
        use rand::{Rng, SeedableRng};
        for seed in 0..300u64 {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=30);
            let f: Vec<Vec<Lit>> = (0..m)
                .map(|_| {
                    let k = rng.gen_range(1..=3);
                    (0..k).map(|_| Var(rng.gen_range(0..n)).lit(rng.gen())).collect()
                })
                .collect();
            for minimize in [false, true] {
                let cfg = SolverConfig { log_proof: true, minimize, ..SolverConfig::default() };
                let run = sat_solve_with(&f, &[], cfg);
                assert_eq!(run.verdict.is_sat(), brute(&f, n as usize), "seed {seed}");
                match run.verdict {
                    SatVerdict::Sat(m) => {
                        assert!(f.iter().all(|c| c.iter().any(|l| m[l.var().index()] == l.is_positive())))
                    }
                    _ => check_proof(run.proof.as_ref().unwrap(), &f).unwrap(),
                }
            }
        }
    }
}
