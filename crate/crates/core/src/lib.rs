//! An execution engine for development-process models.
//!
//! A process model is a graph of activities and artifacts connected by
//! `produce` and `require` associations. A running instance assigns each
//! element one of three states — Inactive, Active, Done — and evolves in
//! discrete steps under six legality rules that allow both forward progress
//! and synchronized backward resets (feedback loops such as "retune the
//! hyper-parameters and redo training").
//!
//! The crate provides, per module:
//!
//! - [`model`]: the process-model types and dependency queries.
//! - [`validate`]: well-formedness checking (rules W1–W7).
//! - [`semantics`]: step legality (rules R1–R6) and successor enumeration.
//! - [`conformance`]: checking recorded traces, plus the trace text format.
//! - [`simulate`]: eager, random and scripted trace generation.
//! - [`ltl`]: linear temporal logic over finite traces, with both a direct
//!   evaluator and a formula-progression evaluator.
//! - [`search`]: bounded reachability and exhaustive trace enumeration.
//! - [`dsl`]: the model text format — parser and canonical printer.
//! - [`dot`]: Graphviz export.
//! - [`catalog`]: built-in example models and recorded traces.

pub mod catalog;
pub mod conformance;
pub mod dot;
pub mod dsl;
pub mod ltl;
pub mod model;
pub mod search;
pub mod semantics;
pub mod simulate;
pub mod validate;
