use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ir::{AtomTable, Formula, Symbol};
use crate::sat::Lit;

/// A DIMACS CNF file.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DimacsDocument {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

fn dimacs_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Dimacs(format!("line {line}: {}", msg.into()))
}

impl DimacsDocument {
    pub fn from_lits(num_vars: usize, clauses: &[Vec<Lit>]) -> DimacsDocument {
        DimacsDocument {
            num_vars,
            clauses: clauses.iter().map(|c| c.iter().map(|l| l.to_dimacs()).collect()).collect(),
        }
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Clauses as solver literals.
    pub fn lits(&self) -> Vec<Vec<Lit>> {
        self.clauses.iter().map(|c| c.iter().map(|&d| Lit::from_dimacs(d)).collect()).collect()
    }

    /// Parses a DIMACS file. The header must precede every clause and its
    /// counts must match the body.
    pub fn parse(text: &str) -> Result<DimacsDocument> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut cur: Vec<i32> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let n = n + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(dimacs_err(n, "second header"));
                }
                let f: Vec<&str> = line.split_whitespace().collect();
                let [_, "cnf", v, c] = f.as_slice() else {
                    return Err(dimacs_err(n, "expected `p cnf <vars> <clauses>`"));
                };
                let v = v.parse().map_err(|_| dimacs_err(n, "bad variable count"))?;
                let c = c.parse().map_err(|_| dimacs_err(n, "bad clause count"))?;
                header = Some((v, c));
                continue;
            }
            let Some((num_vars, _)) = header else {
                return Err(dimacs_err(n, "clause before header"));
            };
            for tok in line.split_whitespace() {
                let d: i32 = tok.parse().map_err(|_| dimacs_err(n, format!("bad literal `{tok}`")))?;
                if d == 0 {
                    clauses.push(std::mem::take(&mut cur));
                } else if d.unsigned_abs() as usize > num_vars {
                    return Err(dimacs_err(n, format!("variable {} exceeds header count {num_vars}", d.abs())));
                } else {
                    cur.push(d);
                }
            }
        }
        let Some((num_vars, num_clauses)) = header else {
            return Err(Error::Dimacs("missing header".into()));
        };
        if !cur.is_empty() {
            return Err(Error::Dimacs("last clause is not terminated by 0".into()));
        }
        if clauses.len() != num_clauses {
            return Err(Error::Dimacs(format!("header declares {num_clauses} clauses, body has {}", clauses.len())));
        }
        Ok(DimacsDocument { num_vars, clauses })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for d in c {
                write!(s, "{d} ").expect("string write");
            }
            s.push_str("0\n");
        }
        s
    }
}

/// Writes Boolean clauses with variables numbered by the atom table.
pub fn write_dimacs(clauses: &[Vec<Lit>], atoms: &AtomTable) -> DimacsDocument {
    let max_var = clauses.iter().flatten().map(|l| l.var().index() + 1).max().unwrap_or(0);
    DimacsDocument::from_lits(atoms.len().max(max_var), clauses)
}

/// Shape of a core file returned by an extractor.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CoreFormat {
    /// One 1-based clause index per line.
    IndexList,
    /// A DIMACS file listing a subset of the original clauses.
    DimacsSubset,
}

fn canonical(c: &[i32]) -> Vec<i32> {
    let mut c = c.to_vec();
    c.sort_unstable();
    c
}

/// Reads a core file as sorted, 0-based indices into `original`.
pub fn read_core(text: &str, original: &DimacsDocument, mode: CoreFormat) -> Result<Vec<usize>> {
    let mut out = match mode {
        CoreFormat::IndexList => {
            let mut out = Vec::new();
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let i: usize = line
                    .parse()
                    .map_err(|_| Error::CoreFile(format!("line {}: bad index `{line}`", n + 1)))?;
                if i == 0 || i > original.clauses.len() {
                    return Err(Error::CoreFile(format!(
                        "line {}: index {i} out of range 1..={}",
                        n + 1,
                        original.clauses.len()
                    )));
                }
                out.push(i - 1);
            }
            out
        }
        CoreFormat::DimacsSubset => {
            let sub = DimacsDocument::parse(text).map_err(|e| Error::CoreFile(e.to_string()))?;
            let mut slots: HashMap<Vec<i32>, Vec<usize>> = HashMap::new();
            for (i, c) in original.clauses.iter().enumerate().rev() {
                slots.entry(canonical(c)).or_default().push(i);
            }
            let mut out = Vec::new();
            for c in &sub.clauses {
                let i = slots
                    .get_mut(&canonical(c))
                    .and_then(|v| v.pop())
                    .ok_or_else(|| Error::CoreFile(format!("clause {c:?} does not match an unused original clause")))?;
                out.push(i);
            }
            out
        }
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Writes `indices` (0-based) as an index list.
pub fn write_core_indices(indices: &[usize]) -> String {
    indices.iter().map(|i| format!("{}\n", i + 1)).collect()
}

/// Writes the clauses of `original` at `indices` as a DIMACS subset.
pub fn write_core_subset(indices: &[usize], original: &DimacsDocument) -> String {
    DimacsDocument {
        num_vars: original.num_vars,
        clauses: indices.iter().map(|&i| original.clauses[i].clone()).collect(),
    }
    .to_text()
}

/// Prints the clauses of `formula` at `indices` as an SMT-LIB script.
pub fn write_smt(formula: &Formula, indices: &[usize]) -> String {
    let ctx = &formula.ctx;
    let mut s = String::new();
    let logic = match formula.logic() {
        crate::ir::Logic::Euf | crate::ir::Logic::Propositional => "QF_UF",
        crate::ir::Logic::Lra => "QF_LRA",
    };
    writeln!(s, "(set-logic {logic})").expect("string write");
    for name in ctx.sig.sorts() {
        writeln!(s, "(declare-sort {} 0)", crate::ir::quote_symbol(name)).expect("string write");
    }
    for (name, sym) in ctx.sig.declarations() {
        let name = crate::ir::quote_symbol(name);
        match sym {
            Symbol::Bool => writeln!(s, "(declare-fun {name} () Bool)"),
            Symbol::Real(_) => writeln!(s, "(declare-fun {name} () Real)"),
            Symbol::Fun(f) => {
                let d = ctx.sig.fun(*f);
                let args: Vec<&str> = d.args.iter().map(|a| ctx.sig.sort_name(*a)).collect();
                writeln!(s, "(declare-fun {name} ({}) {})", args.join(" "), ctx.sig.sort_name(d.ret))
            }
        }
        .expect("string write");
    }
    for (_, atom) in ctx.atoms.iter() {
        if let crate::ir::Atom::Bool(name) = atom {
            if name.starts_with('!') {
                writeln!(s, "(declare-fun {} () Bool)", crate::ir::quote_symbol(name)).expect("string write");
            }
        }
    }
    for &i in indices {
        writeln!(s, "(assert {})", ctx.display_clause(formula.clause(i).lits())).expect("string write");
    }
    s.push_str("(check-sat)\n");
    s
}
