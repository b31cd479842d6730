//! The `lemlift` command line.
//!
//! Exit codes: 10 satisfiable, 20 unsatisfiable, 1 error, 2 incomplete
//! (budget exhausted or an enumeration cap hit). `verify` and `bench` exit
//! 0 on success.

pub mod bench;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lemlift::allmus::{enumerate_mcs, minimal_hitting_sets, AllMusOptions};
use lemlift::extract::{
    boolean_core, check_core, extract, lifted_dimacs, BooleanExtractor, CoreVerdict, ExternalExtractor,
    ExtractorConfig, Method, Verification,
};
use lemlift::frontend::{self, write_core_indices, write_core_subset, write_smt, CoreFormat, DimacsDocument};
use lemlift::ir::Formula;
use lemlift::smt::{smt_solve, SmtOptions, SmtVerdict};

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "lemlift", version, about = "Unsatisfiable cores for SMT formulas by lemma lifting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Give up after this many conflicts.
    #[arg(long, env = "LEMLIFT_BUDGET")]
    pub budget: Option<u64>,
    /// Randomize initial phases and activities.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Check theory consistency only on complete assignments.
    #[arg(long)]
    pub no_early_pruning: bool,
    /// Do not turn theory deductions into clauses.
    #[arg(long)]
    pub no_theory_propagation: bool,
}

impl SearchArgs {
    pub fn options(&self) -> SmtOptions {
        SmtOptions {
            early_pruning: !self.no_early_pruning,
            theory_propagation: !self.no_theory_propagation && !self.no_early_pruning,
            conflict_budget: self.budget,
            seed: self.seed,
            log_proof: false,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// One 1-based clause index per line.
    Index,
    /// A DIMACS file holding the core clauses.
    Dimacs,
}

impl From<FormatArg> for CoreFormat {
    fn from(f: FormatArg) -> CoreFormat {
        match f {
            FormatArg::Index => CoreFormat::IndexList,
            FormatArg::Dimacs => CoreFormat::DimacsSubset,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CoreArgs {
    #[arg(long, default_value = "lift-proof")]
    pub method: Method,
    /// Re-run the Boolean extractor on its own output until it stops shrinking.
    #[arg(long)]
    pub fixpoint: bool,
    /// Reduce the core to a minimal one by deletion.
    #[arg(long)]
    pub minimize: bool,
    /// Check the core with a fresh solver before printing it.
    #[arg(long)]
    pub verify: bool,
    /// Extractor command for lift-external; `{in}` and `{out}` are replaced
    /// by the DIMACS input and core output paths.
    #[arg(long)]
    pub extractor_cmd: Option<String>,
    #[arg(long, value_enum, default_value = "index")]
    pub extractor_format: FormatArg,
    /// Seconds before the external extractor is killed.
    #[arg(long, default_value_t = 60.0)]
    pub extractor_timeout: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

impl CoreArgs {
    pub fn config(&self) -> anyhow::Result<ExtractorConfig> {
        let kind = match &self.extractor_cmd {
            Some(cmd) => {
                let mut e = ExternalExtractor::new(cmd.clone(), self.extractor_format.into())?;
                e.timeout = Duration::from_secs_f64(self.extractor_timeout);
                BooleanExtractor::External(e)
            }
            None => BooleanExtractor::InternalProof,
        };
        Ok(ExtractorConfig {
            kind,
            fixpoint: self.fixpoint,
            minimize: self.minimize,
            verify: self.verify,
            smt: self.search.options(),
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Decide satisfiability.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Extract an unsatisfiable core.
    Core {
        file: PathBuf,
        #[command(flatten)]
        args: CoreArgs,
        /// Write the core as a new SMT-LIB script.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List all minimal correction subsets and all minimal cores.
    Allmus {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_mcs: usize,
        #[arg(long, default_value_t = 10_000)]
        max_mus: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check that a list of 1-based clause indices is an unsatisfiable core.
    Verify { file: PathBuf, core: PathBuf },
    /// Run several methods over a directory of `.smt2` files.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "lift-proof,lift-selectors,smt-proof,smt-selectors")]
        methods: Vec<Method>,
        /// Method the others are compared against; defaults to the first.
        #[arg(long)]
        baseline: Option<Method>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        args: CoreArgs,
    },
    /// Write the lifted Boolean formula (abstraction plus lemmas) as DIMACS.
    Lift { file: PathBuf, out: PathBuf },
    /// Propositional core of a DIMACS file; usable as an external extractor.
    BoolCore {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "index")]
        format: FormatArg,
        /// Read the core off assumption selectors instead of the proof.
        #[arg(long)]
        selectors: bool,
        #[arg(long)]
        fixpoint: bool,
    },
}

fn load(path: &Path) -> anyhow::Result<Formula> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    frontend::load(&text).with_context(|| format!("in {}", path.display()))
}

fn one_based(xs: &[usize]) -> String {
    xs.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cli.command {
        Cmd::Solve { file, search } => {
            let f = load(&file)?;
            let run = smt_solve(&f, &search.options())?;
            log::info!("{} lemmas, {} conflicts", run.lemmas.len(), run.stats.conflicts);
            Ok(match run.verdict {
                SmtVerdict::Sat(_) => {
                    writeln!(out, "sat")?;
                    EXIT_SAT
                }
                SmtVerdict::Unknown => {
                    writeln!(out, "unknown")?;
                    EXIT_INCOMPLETE
                }
                _ => {
                    writeln!(out, "unsat")?;
                    EXIT_UNSAT
                }
            })
        }
        Cmd::Core { file, args, out: smt_out } => {
            let f = load(&file)?;
            let cfg = args.config()?;
            let r = match extract(&f, args.method, &cfg) {
                Err(lemlift::Error::Budget) => {
                    writeln!(out, "unknown")?;
                    return Ok(EXIT_INCOMPLETE);
                }
                r => r?,
            };
            if r.verdict == CoreVerdict::Sat {
                writeln!(out, "sat")?;
                return Ok(EXIT_SAT);
            }
            if let Verification::Failed(v) = &r.verification {
                bail!("core check failed: {v}");
            }
            writeln!(out, "unsat")?;
            writeln!(out, "method: {}", r.method)?;
            writeln!(out, "core: {}", one_based(&r.core))?;
            writeln!(out, "assertions: {}", one_based(&r.assertions))?;
            writeln!(out, "size: {} of {}", r.core.len(), r.input_size)?;
            writeln!(out, "lemmas: {}", r.lemmas)?;
            if r.verification == Verification::Passed {
                writeln!(out, "verified: yes")?;
            }
            if let Some(p) = smt_out {
                std::fs::write(&p, write_smt(&f, &r.core)).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(EXIT_UNSAT)
        }
        Cmd::Allmus { file, max_mcs, max_mus, search } => {
            let f = load(&file)?;
            let opts = AllMusOptions { max_mcs, max_mus, smt: search.options() };
            let m = enumerate_mcs(&f, &opts)?;
            let u = minimal_hitting_sets(&m, max_mus);
            let complete = m.complete && u.complete;
            if !complete {
                writeln!(out, "INCOMPLETE: enumeration stopped at a cap or the conflict budget")?;
            }
            writeln!(out, "{}", if m.sat { "sat" } else { "unsat" })?;
            writeln!(out, "mcs {}", m.sets.len())?;
            for s in &m.sets {
                writeln!(out, "{}", one_based(s))?;
            }
            writeln!(out, "mus {}", u.sets.len())?;
            for s in &u.sets {
                writeln!(out, "{}", one_based(s))?;
            }
            Ok(if !complete {
                EXIT_INCOMPLETE
            } else if m.sat {
                EXIT_SAT
            } else {
                EXIT_UNSAT
            })
        }
        Cmd::Verify { file, core } => {
            let f = load(&file)?;
            let text = std::fs::read_to_string(&core).with_context(|| format!("reading {}", core.display()))?;
            let mut idx = Vec::new();
            for tok in text.split_whitespace() {
                let i: usize = tok.parse().with_context(|| format!("bad clause index `{tok}`"))?;
                if i == 0 {
                    bail!("clause indices are 1-based");
                }
                idx.push(i - 1);
            }
            match check_core(&f, &idx) {
                Ok(()) => {
                    writeln!(out, "ok")?;
                    Ok(0)
                }
                Err(v) => {
                    writeln!(out, "violation: {v}")?;
                    Ok(EXIT_ERROR)
                }
            }
        }
        Cmd::Bench { dir, methods, baseline, csv, jobs, args } => {
            if methods.is_empty() {
                bail!("no methods given");
            }
            let cfg = args.config()?;
            let baseline = baseline.unwrap_or(methods[0]);
            let mut all = methods.clone();
            if !all.contains(&baseline) {
                all.insert(0, baseline);
            }
            let paths = bench::instances(&dir)?;
            let records = bench::run_bench(&paths, &all, &cfg, jobs);
            match csv {
                Some(p) => {
                    let file = std::fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
                    bench::write_csv(&records, file)?;
                }
                None => {
                    bench::write_csv(&records, &mut *out)?;
                    writeln!(out)?;
                }
            }
            write!(out, "{}", bench::ratio_table(&records, baseline, &all))?;
            Ok(0)
        }
        Cmd::Lift { file, out: path } => {
            let f = load(&file)?;
            let run = smt_solve(&f, &SmtOptions::default())?;
            match run.verdict {
                SmtVerdict::Sat(_) => {
                    writeln!(out, "sat")?;
                    Ok(EXIT_SAT)
                }
                SmtVerdict::Unknown => {
                    writeln!(out, "unknown")?;
                    Ok(EXIT_INCOMPLETE)
                }
                _ => {
                    let doc = lifted_dimacs(&f, &run.lemmas);
                    std::fs::write(&path, doc.to_text()).with_context(|| format!("writing {}", path.display()))?;
                    writeln!(out, "unsat")?;
                    writeln!(out, "clauses: {} input, {} lemmas", f.len(), run.lemmas.len())?;
                    Ok(EXIT_UNSAT)
                }
            }
        }
        Cmd::BoolCore { input, output, format, selectors, fixpoint } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let doc = DimacsDocument::parse(&text)?;
            let kind = if selectors { BooleanExtractor::InternalSelectors } else { BooleanExtractor::InternalProof };
            let core = match boolean_core(&doc.lits(), &kind, fixpoint) {
                Err(lemlift::Error::Satisfiable) => {
                    writeln!(out, "sat")?;
                    return Ok(EXIT_SAT);
                }
                r => r?,
            };
            let body = match format {
                FormatArg::Index => write_core_indices(&core),
                FormatArg::Dimacs => write_core_subset(&core, &doc),
            };
            std::fs::write(&output, body).with_context(|| format!("writing {}", output.display()))?;
            writeln!(out, "unsat")?;
            Ok(EXIT_UNSAT)
        }
    }
}
