//! Unsatisfiable-core extraction for SMT formulas over equality with
//! uninterpreted functions and linear rational arithmetic.
//!
//! The central entry point is [`extract::lemma_lift_core`]: solve the
//! formula with a lazy DPLL(T) engine that records every theory lemma, hand
//! the Boolean abstraction of the input clauses plus those lemmas to a
//! propositional core extractor, and keep the input clauses of the result.

pub mod allmus;
pub mod error;
pub mod extract;
pub mod frontend;
pub mod ir;
pub mod sat;
pub mod smt;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/loading.md")]
    mod loading {}
    #[doc = include_str!("../../../book/src/cores.md")]
    mod cores {}
    #[doc = include_str!("../../../book/src/external.md")]
    mod external {}
    #[doc = include_str!("../../../book/src/allmus.md")]
    mod allmus {}
    #[doc = include_str!("../../../book/src/bench.md")]
    mod bench {}
}
