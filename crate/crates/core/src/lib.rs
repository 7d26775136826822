//! Evaluation core for mapped, routed and scheduled neutral-atom circuits.
//!
//! Circuits arrive as RSQASM, a stage-based text format whose operands name
//! cells of a square trap grid rather than logical qubits. Hardware is
//! described by a JSON architecture document. From those two inputs this
//! crate
//!
//! - simulates grid occupancy stage by stage ([`grid`]),
//! - computes decoherence, gate and movement fidelities and the approximate
//!   success probability under a single compiler-agnostic model ([`eval`]),
//! - recomputes the same circuit under the metric arithmetic of three
//!   existing compilers ([`models`]),
//! - collapses representation-level redundant shuttling ([`normalize`]),
//! - builds test circuits from a restricted flat QASM subset ([`ingest`]).
//!
//! The crate is `no_std` and only needs `alloc`. File IO, report rendering
//! and the command-line front end live in the `na-evalkit` crate.
//!
//! ```
//! use na_evalkit_core::{arch, eval, rsqasm};
//!
//! let spec = arch::ArchitectureSpec::example_grid(50, 30);
//! let program = rsqasm::parse_program("RSQASM 1.0;\ncz q[0], q[1];\n").unwrap();
//! let breakdown = eval::evaluate_unified(&program, &spec).unwrap();
//! assert_eq!(breakdown.two_qubit_gate_count, 1);
//! assert!(breakdown.asp > 0.999);
//! ```

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations, rust_2018_idioms, unused_qualifications)]

extern crate alloc;

pub mod arch;
pub mod eval;
pub mod gate;
pub mod grid;
pub mod ingest;
mod lex;
pub mod models;
pub mod normalize;
pub mod rsqasm;

pub use arch::{ArchitectureSpec, QubitPlacement};
pub use eval::FidelityBreakdown;
pub use gate::GateKind;
pub use grid::{AtomId, Cell, GridState};
pub use models::ModelSelector;
pub use normalize::NormalizationReport;
pub use rsqasm::{Instruction, Program, Stage};
