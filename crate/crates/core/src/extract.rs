//! Unsatisfiable-core extraction: lemma lifting, the proof- and
//! assumption-based SMT baselines, deletion-based minimization, the bridge
//! to external Boolean extractors, and an independent core checker.

use std::fmt;
use std::path::Path;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{BridgeStage, Error, Result};
use crate::frontend::{read_core, write_dimacs, CoreFormat, DimacsDocument};
use crate::ir::Formula;
use crate::sat::{proof_core, sat_solve, solve_with_selectors, Lit, SatVerdict};
use crate::smt::{is_satisfiable, smt_solve, SmtOptions, SmtSolver, SmtVerdict, TLemmaStore};

/// A propositional core extractor run as a subprocess.
///
/// `command` is run through `sh -c` after replacing `{in}` with the path of
/// a DIMACS file and `{out}` with the path where the core must be written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalExtractor {
    pub command: String,
    pub format: CoreFormat,
    pub timeout: Duration,
}

impl ExternalExtractor {
    pub fn new(command: impl Into<String>, format: CoreFormat) -> Result<ExternalExtractor> {
        let command = command.into();
        if !command.contains("{in}") || !command.contains("{out}") {
            return Err(Error::Precondition("extractor command needs `{in}` and `{out}` placeholders".into()));
        }
        Ok(ExternalExtractor { command, format, timeout: Duration::from_secs(60) })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BooleanExtractor {
    /// Leaves of the resolution refutation.
    InternalProof,
    /// Clauses whose selectors occur in the final assumption conflict.
    InternalSelectors,
    External(ExternalExtractor),
}

#[derive(Clone, Debug)]
pub struct ExtractorConfig {
    pub kind: BooleanExtractor,
    /// Re-extract from the extractor's own output until the size is stable.
    pub fixpoint: bool,
    /// Shrink the final core to a minimal one by deletion.
    pub minimize: bool,
    /// Check every core with [`check_core`]. Always on in debug builds.
    pub verify: bool,
    pub smt: SmtOptions,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            kind: BooleanExtractor::InternalProof,
            fixpoint: false,
            minimize: false,
            verify: false,
            smt: SmtOptions::default(),
        }
    }
}

/// Extraction strategies.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    LiftProof,
    LiftSelectors,
    LiftExternal,
    SmtProof,
    SmtSelectors,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::LiftProof, Method::LiftSelectors, Method::LiftExternal, Method::SmtProof, Method::SmtSelectors];

    pub fn name(self) -> &'static str {
        match self {
            Method::LiftProof => "lift-proof",
            Method::LiftSelectors => "lift-selectors",
            Method::LiftExternal => "lift-external",
            Method::SmtProof => "smt-proof",
            Method::SmtSelectors => "smt-selectors",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Skipped,
    Passed,
    Failed(CoreViolation),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CoreVerdict {
    Sat,
    Unsat,
}

/// Outcome of one extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreReport {
    pub verdict: CoreVerdict,
    /// Sorted 0-based clause indices; empty when satisfiable.
    pub core: Vec<usize>,
    pub method: Method,
    pub input_size: usize,
    pub verification: Verification,
    /// Input assertions the core's clauses came from.
    pub assertions: Vec<usize>,
    /// Theory lemmas stored by the search.
    pub lemmas: usize,
}

impl CoreReport {
    fn sat(formula: &Formula, method: Method, lemmas: usize) -> CoreReport {
        CoreReport {
            verdict: CoreVerdict::Sat,
            core: Vec::new(),
            method,
            input_size: formula.len(),
            verification: Verification::Skipped,
            assertions: Vec::new(),
            lemmas,
        }
    }

    pub fn core_size(&self) -> usize {
        self.core.len()
    }

    pub fn is_unsat(&self) -> bool {
        self.verdict == CoreVerdict::Unsat
    }
}

/// Why [`check_core`] rejected a core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoreViolation {
    OutOfRange(usize),
    Duplicate(usize),
    Satisfiable,
}

impl fmt::Display for CoreViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreViolation::OutOfRange(i) => write!(f, "clause index {i} out of range"),
            CoreViolation::Duplicate(i) => write!(f, "clause index {i} listed twice"),
            CoreViolation::Satisfiable => f.write_str("the selected clauses are satisfiable"),
        }
    }
}

/// Checks that `core` names distinct clauses of `formula` that are jointly
/// theory-unsatisfiable, using a fresh solver.
pub fn check_core(formula: &Formula, core: &[usize]) -> Result<(), CoreViolation> {
    let mut seen = vec![false; formula.len()];
    for &i in core {
        match seen.get_mut(i) {
            None => return Err(CoreViolation::OutOfRange(i)),
            Some(true) => return Err(CoreViolation::Duplicate(i)),
            Some(s) => *s = true,
        }
    }
    match is_satisfiable(formula, core, &SmtOptions::default()) {
        Ok(false) => Ok(()),
        _ => Err(CoreViolation::Satisfiable),
    }
}

fn is_unsat_cnf(clauses: &[Vec<Lit>], indices: &[usize]) -> bool {
    let sub: Vec<Vec<Lit>> = indices.iter().map(|&i| clauses[i].clone()).collect();
    sat_solve(&sub, &[], false).verdict == SatVerdict::Unsat
}

fn extract_once(clauses: &[Vec<Lit>], kind: &BooleanExtractor) -> Result<Vec<usize>> {
    match kind {
        BooleanExtractor::InternalProof => {
            let run = sat_solve(clauses, &[], true);
            match run.verdict {
                SatVerdict::Unsat => proof_core(run.proof.as_ref().expect("proof was logged")),
                _ => Err(Error::Satisfiable),
            }
        }
        BooleanExtractor::InternalSelectors => match solve_with_selectors(clauses) {
            (_, Some(core)) => Ok(core),
            _ => Err(Error::Satisfiable),
        },
        BooleanExtractor::External(ext) => external_bridge(clauses, ext),
    }
}

/// Indices of an unsatisfiable subset of `clauses`. With `fixpoint`, the
/// extractor is re-run on its own output until the size stops shrinking.
pub fn boolean_core(clauses: &[Vec<Lit>], kind: &BooleanExtractor, fixpoint: bool) -> Result<Vec<usize>> {
    let mut core = extract_once(clauses, kind)?;
    if !fixpoint {
        return Ok(core);
    }
    loop {
        let sub: Vec<Vec<Lit>> = core.iter().map(|&i| clauses[i].clone()).collect();
        let next: Vec<usize> = extract_once(&sub, kind)?.into_iter().map(|j| core[j]).collect();
        log::debug!("fixpoint iteration: {} -> {}", core.len(), next.len());
        let done = next.len() >= core.len();
        core = next;
        if done {
            return Ok(core);
        }
    }
}

fn bridge_err(stage: BridgeStage, msg: impl Into<String>, dir: tempfile::TempDir) -> Error {
    let retained = Some(dir.keep());
    Error::Bridge { stage, msg: msg.into(), retained }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

/// Runs an external extractor on `clauses` and validates its answer: the
/// command must exit with 0 or 20, and the returned indices must name
/// clauses of the emitted file and be unsatisfiable. Temporary files are
/// kept when anything goes wrong.
pub fn external_bridge(clauses: &[Vec<Lit>], ext: &ExternalExtractor) -> Result<Vec<usize>> {
    let dir = tempfile::Builder::new().prefix("lemlift-bridge-").tempdir()?;
    let input = dir.path().join("input.cnf");
    let output = dir.path().join("core.out");
    let num_vars = clauses.iter().flatten().map(|l| l.var().index() + 1).max().unwrap_or(0);
    let doc = DimacsDocument::from_lits(num_vars, clauses);
    if let Err(e) = std::fs::write(&input, doc.to_text()) {
        return Err(bridge_err(BridgeStage::WriteInput, e.to_string(), dir));
    }
    let cmd = ext.command.replace("{in}", &shell_quote(&input)).replace("{out}", &shell_quote(&output));
    log::debug!("running extractor: {cmd}");
    let stderr_path = dir.path().join("stderr.txt");
    let stderr = match std::fs::File::create(&stderr_path) {
        Ok(f) => f,
        Err(e) => return Err(bridge_err(BridgeStage::Spawn, e.to_string(), dir)),
    };
    let mut child =
        match Command::new("sh").arg("-c").arg(&cmd).stdin(Stdio::null()).stdout(Stdio::null()).stderr(stderr).spawn() {
            Ok(c) => c,
            Err(e) => return Err(bridge_err(BridgeStage::Spawn, e.to_string(), dir)),
        };
    let deadline = Instant::now() + ext.timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break s,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(bridge_err(BridgeStage::Timeout, format!("no answer within {:?}", ext.timeout), dir));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
            Err(e) => return Err(bridge_err(BridgeStage::Spawn, e.to_string(), dir)),
        }
    };
    // 20 is the usual exit code of SAT tools that report unsatisfiability
    if !matches!(status.code(), Some(0 | 20)) {
        let err = std::fs::read_to_string(&stderr_path).unwrap_or_default();
        return Err(bridge_err(BridgeStage::ExitStatus, format!("{status}: {}", err.trim()), dir));
    }
    let text = match std::fs::read_to_string(&output) {
        Ok(t) => t,
        Err(e) => return Err(bridge_err(BridgeStage::ReadOutput, e.to_string(), dir)),
    };
    let core = match read_core(&text, &doc, ext.format) {
        Ok(c) => c,
        Err(e) => return Err(bridge_err(BridgeStage::ReadOutput, e.to_string(), dir)),
    };
    if !is_unsat_cnf(clauses, &core) {
        return Err(bridge_err(BridgeStage::Validate, format!("returned clause set {core:?} is satisfiable"), dir));
    }
    Ok(core)
}

/// The Boolean formula handed to the extractor by lemma lifting: the
/// abstraction of every input clause, then of every stored lemma.
pub fn lifted_clauses(formula: &Formula, lemmas: &TLemmaStore) -> Vec<Vec<Lit>> {
    (0..formula.len())
        .map(|i| formula.abstract_clause(i))
        .chain(lemmas.iter().map(|l| formula.ctx.t2p(&l.lits)))
        .collect()
}

/// [`lifted_clauses`] as a DIMACS document numbered by the atom table.
pub fn lifted_dimacs(formula: &Formula, lemmas: &TLemmaStore) -> DimacsDocument {
    write_dimacs(&lifted_clauses(formula, lemmas), &formula.ctx.atoms)
}

fn finish(formula: &Formula, mut core: Vec<usize>, method: Method, lemmas: usize, cfg: &ExtractorConfig) -> Result<CoreReport> {
    core.sort_unstable();
    core.dedup();
    if cfg.minimize {
        core = minimize_core(formula, &core, &cfg.smt)?;
    }
    let verification = if cfg.verify || cfg!(debug_assertions) {
        match check_core(formula, &core) {
            Ok(()) => Verification::Passed,
            Err(v) => {
                log::error!("{method} produced a bad core: {v}");
                Verification::Failed(v)
            }
        }
    } else {
        Verification::Skipped
    };
    Ok(CoreReport {
        verdict: CoreVerdict::Unsat,
        assertions: formula.assertions_of(&core),
        core,
        method,
        input_size: formula.len(),
        verification,
        lemmas,
    })
}

/// Lemma lifting: solve, lift the stored lemmas next to the input clauses,
/// extract a Boolean core, and keep its input clauses.
///
/// ```
/// use lemlift::extract::{lemma_lift_core, ExtractorConfig};
/// use lemlift::frontend::load;
///
/// let f = load(
///     "(declare-fun x () Real) (declare-fun p () Bool)
///      (assert (> x 2)) (assert (or p (< x 0))) (assert (not p)) (assert (< x 5))",
/// )
/// .unwrap();
/// let report = lemma_lift_core(&f, &ExtractorConfig::default()).unwrap();
/// assert_eq!(report.core, vec![0, 1, 2]);
/// ```
pub fn lemma_lift_core(formula: &Formula, cfg: &ExtractorConfig) -> Result<CoreReport> {
    let method = match cfg.kind {
        BooleanExtractor::InternalProof => Method::LiftProof,
        BooleanExtractor::InternalSelectors => Method::LiftSelectors,
        BooleanExtractor::External(_) => Method::LiftExternal,
    };
    let run = smt_solve(formula, &SmtOptions { log_proof: false, ..cfg.smt.clone() })?;
    match run.verdict {
        SmtVerdict::Sat(_) => return Ok(CoreReport::sat(formula, method, run.lemmas.len())),
        SmtVerdict::Unknown => return Err(Error::Budget),
        _ => {}
    }
    let lifted = lifted_clauses(formula, &run.lemmas);
    log::debug!("lifted formula: {} input clauses, {} lemmas", formula.len(), run.lemmas.len());
    let core = boolean_core(&lifted, &cfg.kind, cfg.fixpoint)?;
    let originals: Vec<usize> = core.into_iter().filter(|&i| i < formula.len()).collect();
    finish(formula, originals, method, run.lemmas.len(), cfg)
}

/// Proof-based SMT core: the input clauses among the leaves of the
/// refutation, where lemma clauses are also leaves.
pub fn smt_proof_core(formula: &Formula, cfg: &ExtractorConfig) -> Result<CoreReport> {
    let mut s = SmtSolver::for_formula(formula, SmtOptions { log_proof: true, ..cfg.smt.clone() })?;
    match s.solve(&[])? {
        SmtVerdict::Sat(_) => return Ok(CoreReport::sat(formula, Method::SmtProof, s.lemmas().len())),
        SmtVerdict::Unknown => return Err(Error::Budget),
        _ => {}
    }
    let (inputs, _) = s.proof_leaves()?;
    finish(formula, inputs, Method::SmtProof, s.lemmas().len(), cfg)
}

/// Assumption-based SMT core: clause `i` is guarded by a selector `s_i`, all
/// selectors are assumed, and the core is read off the final conflict.
pub fn smt_assumption_core(formula: &Formula, cfg: &ExtractorConfig) -> Result<CoreReport> {
    let mut s = SmtSolver::new(&formula.ctx, formula.logic(), SmtOptions { log_proof: false, ..cfg.smt.clone() });
    let selectors: Vec<Lit> = (0..formula.len()).map(|_| s.new_var()).collect();
    for (c, sel) in formula.clauses().iter().zip(&selectors) {
        s.add_clause(c.lits(), &[!*sel])?;
    }
    let core = match s.solve(&selectors)? {
        SmtVerdict::Sat(_) => return Ok(CoreReport::sat(formula, Method::SmtSelectors, s.lemmas().len())),
        SmtVerdict::Unknown => return Err(Error::Budget),
        SmtVerdict::UnsatAssumptions(conflict) => {
            conflict.iter().map(|l| selectors.iter().position(|s| *s == !*l).expect("selector")).collect()
        }
        SmtVerdict::Unsat => (0..formula.len()).collect(),
    };
    finish(formula, core, Method::SmtSelectors, s.lemmas().len(), cfg)
}

/// Runs one extraction method. Lifting methods take their Boolean extractor
/// from the method, except `lift-external`, which needs an external
/// extractor configured in `cfg`.
pub fn extract(formula: &Formula, method: Method, cfg: &ExtractorConfig) -> Result<CoreReport> {
    let with = |kind| ExtractorConfig { kind, ..cfg.clone() };
    match method {
        Method::LiftProof => lemma_lift_core(formula, &with(BooleanExtractor::InternalProof)),
        Method::LiftSelectors => lemma_lift_core(formula, &with(BooleanExtractor::InternalSelectors)),
        Method::LiftExternal => match &cfg.kind {
            BooleanExtractor::External(_) => lemma_lift_core(formula, cfg),
            _ => Err(Error::Precondition("lift-external needs an extractor command".into())),
        },
        Method::SmtProof => smt_proof_core(formula, cfg),
        Method::SmtSelectors => smt_assumption_core(formula, cfg),
    }
}

/// Deletion-based minimization: try dropping each clause, highest index
/// first, and keep the deletion whenever the rest stays unsatisfiable.
pub fn minimize_core(formula: &Formula, core: &[usize], opts: &SmtOptions) -> Result<Vec<usize>> {
    let mut cur: Vec<usize> = core.to_vec();
    cur.sort_unstable();
    cur.dedup();
    if let Some(&i) = cur.iter().find(|&&i| i >= formula.len()) {
        return Err(Error::Precondition(format!("clause index {i} out of range")));
    }
    if is_satisfiable(formula, &cur, opts)? {
        return Err(Error::Precondition("core to minimize is satisfiable".into()));
    }
    for k in (0..cur.len()).rev() {
        let candidate: Vec<usize> = cur.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &c)| c).collect();
        if !is_satisfiable(formula, &candidate, opts)? {
            cur = candidate;
        }
    }
    Ok(cur)
}
