//! Input parsing, CNF conversion, and DIMACS and core-file exchange.

mod cnf;
mod dimacs;
mod parse;
mod sexp;

pub use cnf::{cnf_convert, cnf_convert_with, CnfOptions};
pub use dimacs::{read_core, write_core_indices, write_core_subset, write_dimacs, write_smt, CoreFormat, DimacsDocument};
pub use parse::{parse, AssertionSet, Expr};

/// Parses `text` and converts it to CNF with default options.
pub fn load(text: &str) -> crate::Result<crate::ir::Formula> {
    cnf_convert(parse(text)?)
}
