//! Enumeration and counting of minimal unsatisfiable subsets (MUSes).
//!
//! The central construction is an answer-set program whose answer sets are in
//! one-to-one correspondence with the unsatisfiable cores of a CNF formula;
//! its answer sets that are subset-minimal on the clause selector atoms are
//! exactly the MUSes. Around it the crate provides:
//!
//! * [`cnf`]: formulas, DIMACS I/O, evaluation.
//! * [`satcore`]: an embedded CDCL solver with selector assumptions.
//! * [`aspsem`]: ground answer-set semantics used as a brute-force oracle.
//! * [`encoder`]: the program construction, pruning constraints and
//!   ASP-Core-2 text output for external solvers.
//! * [`heuristics`]: lean kernel, cardinality bounds, clause components,
//!   correction sets and literal cover rules.
//! * [`enumerate`]: the brute-force oracle, the in-process ASP route, a
//!   seed-shrink enumerator and the size-based hybrid dispatcher.
//! * [`bench`]: average ranks, PAR2 and a batch harness.

pub mod aspsem;
pub mod bench;
pub mod budget;
pub mod cnf;
pub mod encoder;
pub mod enumerate;
pub mod generate;
pub mod heuristics;
pub mod satcore;

pub use budget::Budget;
pub use cnf::{parse_dimacs, Clause, CnfFormula, Lit, Var};
pub use encoder::{build_program, emit_aspcore2, EncodingOptions, HeuristicFlags};
pub use enumerate::{count_mus, hybrid_enumerate, Engine, EnumerationResult, HybridPolicy};
pub use heuristics::HeuristicBundle;
