//! Ground-state encoding of 3-SAT into a tailored many-body energy landscape.
//!
//! The pipeline: parse or generate a 3-CNF formula ([`formula`]), tailor the
//! three-literal clause evaluator so satisfied clauses are degenerate and the
//! violated class pays a fixed gap ([`ce3`]), compile formula + parameters
//! into an incremental energy model ([`compiler`]), verify the landscape
//! exhaustively on small instances ([`oracle`]), and search it by annealed
//! single-flip dynamics ([`dynamics`]).

pub mod ce3;
pub mod compiler;
pub mod dynamics;
pub mod formula;
pub mod oracle;
pub mod textfmt;

pub use ce3::{Ce3Params, Ce3Solution};
pub use compiler::{compile, EnergyModel, Netlist, WalkState};
pub use dynamics::{metropolis_run, multi_restart, RunConfig, RunResult, Schedule};
pub use formula::{Assignment, Clause, Formula, FormulaError, Literal};
pub use oracle::{check_encoding, enumerate_spectrum, EncodingReport, SpectrumReport};
