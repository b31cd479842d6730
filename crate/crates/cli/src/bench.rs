//! Benchmark records, their CSV form, and ratio tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context as _};
use lemlift::extract::{check_core, extract, CoreVerdict, ExtractorConfig, Method};
use lemlift::stats::{RatioRow, RatioStats, RatioTable};

pub const CSV_HEADER: [&str; 6] = ["instance", "clauses", "method", "core_size", "time_ms", "verified"];

/// How a benchmark run ended.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// Core found and confirmed by the independent checker.
    Yes,
    /// Core found but rejected by the checker.
    No,
    Sat,
    Budget,
    Error,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Yes => "yes",
            Status::No => "no",
            Status::Sat => "sat",
            Status::Budget => "budget",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Status> {
        [Status::Yes, Status::No, Status::Sat, Status::Budget, Status::Error]
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| anyhow!("unknown status `{s}`"))
    }
}

/// One instance run with one method.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub instance: String,
    pub clauses: usize,
    pub method: Method,
    pub core_size: Option<usize>,
    pub time_ms: f64,
    pub verified: Status,
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.clauses.to_string(),
            r.method.to_string(),
            r.core_size.map(|s| s.to_string()).unwrap_or_default(),
            r.time_ms.to_string(),
            r.verified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> anyhow::Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(CSV_HEADER) {
        bail!("unexpected CSV header");
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let core_size = match &row[3] {
            "" => None,
            s => Some(s.parse()?),
        };
        out.push(BenchRecord {
            instance: row[0].to_string(),
            clauses: row[1].parse()?,
            method: row[2].parse()?,
            core_size,
            time_ms: row[4].parse()?,
            verified: row[5].parse()?,
        });
    }
    Ok(out)
}

/// Statistics of `core_size(m) / core_size(baseline)` for each method `m`,
/// over the instances where both cores were verified.
pub fn ratio_table(records: &[BenchRecord], baseline: Method, methods: &[Method]) -> RatioTable {
    let mut by_instance: BTreeMap<&str, BTreeMap<Method, Option<usize>>> = BTreeMap::new();
    for r in records {
        let size = if r.verified == Status::Yes { r.core_size } else { None };
        by_instance.entry(&r.instance).or_default().insert(r.method, size);
    }
    let rows = methods
        .iter()
        .map(|&m| {
            let pairs: Vec<(Option<usize>, Option<usize>)> = by_instance
                .values()
                .map(|ms| (ms.get(&baseline).copied().flatten(), ms.get(&m).copied().flatten()))
                .collect();
            RatioRow { label: m.to_string(), stats: RatioStats::from_core_sizes(&pairs) }
        })
        .collect();
    RatioTable { baseline: baseline.to_string(), rows }
}

fn run_one(path: &Path, methods: &[Method], cfg: &ExtractorConfig) -> Vec<BenchRecord> {
    let instance = path.display().to_string();
    let formula = std::fs::read_to_string(path)
        .with_context(|| format!("reading {instance}"))
        .and_then(|text| lemlift::frontend::load(&text).map_err(anyhow::Error::from));
    let formula = match formula {
        Ok(f) => f,
        Err(e) => {
            log::warn!("{instance}: {e:#}");
            return methods
                .iter()
                .map(|&method| BenchRecord {
                    instance: instance.clone(),
                    clauses: 0,
                    method,
                    core_size: None,
                    time_ms: 0.0,
                    verified: Status::Error,
                })
                .collect();
        }
    };
    methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let res = extract(&formula, method, cfg);
            let time_ms = start.elapsed().as_micros() as f64 / 1000.0;
            let (core_size, verified) = match res {
                Ok(r) if r.verdict == CoreVerdict::Sat => (None, Status::Sat),
                Ok(r) => {
                    let ok = check_core(&formula, &r.core).is_ok();
                    (Some(r.core.len()), if ok { Status::Yes } else { Status::No })
                }
                Err(lemlift::Error::Budget) => (None, Status::Budget),
                Err(e) => {
                    log::warn!("{instance} {method}: {e}");
                    (None, Status::Error)
                }
            };
            BenchRecord { instance: instance.clone(), clauses: formula.len(), method, core_size, time_ms, verified }
        })
        .collect()
}

/// `.smt2` files directly inside `dir`, sorted by name.
pub fn instances(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "smt2") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Runs every method on every instance with `jobs` worker threads. Rows
/// come back in instance order, then method order.
pub fn run_bench(paths: &[PathBuf], methods: &[Method], cfg: &ExtractorConfig, jobs: usize) -> Vec<BenchRecord> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Vec<BenchRecord>>>> = Mutex::new(vec![None; paths.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = paths.get(i) else { break };
                let rows = run_one(p, methods, cfg);
                results.lock().unwrap()[i] = Some(rows);
            });
        }
    });
    results.into_inner().unwrap().into_iter().flatten().flatten().collect()
}
