use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("undeclared symbol `{0}`")]
    Undeclared(String),

    #[error("sort error: {0}")]
    Sort(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("tautological clause (contains a literal and its negation){}", fmt_assertion(*.assertion))]
    Tautology { assertion: Option<usize> },

    #[error("assertion {0} simplifies to true and cannot be represented as a clause")]
    TrivialAssertion(usize),

    #[error("unknown Boolean variable {0} (abstraction and clause set out of sync)")]
    UnknownVariable(u32),

    #[error("DIMACS: {0}")]
    Dimacs(String),

    #[error("core file: {0}")]
    CoreFile(String),

    #[error("literal does not belong to the {0} theory")]
    WrongTheory(&'static str),

    #[error("stale backtrack mark {0}")]
    StaleMark(usize),

    #[error("malformed proof at node {node}: {msg}")]
    Proof { node: usize, msg: String },

    #[error("clause set is satisfiable, no core exists")]
    Satisfiable,

    #[error("resource budget exhausted")]
    Budget,

    #[error("external extractor ({stage}): {msg}")]
    Bridge { stage: BridgeStage, msg: String, retained: Option<PathBuf> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_assertion(a: Option<usize>) -> String {
    match a {
        Some(a) => format!(" in assertion {}", a + 1),
        None => String::new(),
    }
}

/// The step of the external-extractor round trip that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BridgeStage {
    WriteInput,
    Spawn,
    Timeout,
    ExitStatus,
    ReadOutput,
    Validate,
}

impl std::fmt::Display for BridgeStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BridgeStage::WriteInput => "writing DIMACS input",
            BridgeStage::Spawn => "spawning command",
            BridgeStage::Timeout => "timeout",
            BridgeStage::ExitStatus => "exit status",
            BridgeStage::ReadOutput => "reading core output",
            BridgeStage::Validate => "validating returned core",
        })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
