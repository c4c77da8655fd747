//! Compiler for mapping 1Q + CZ circuits onto a single-zone neutral-atom
//! tweezer device.
//!
//! The pipeline has two steps. Step 1 optimizes a 2D placement of the
//! logical qubits in normalized coordinates against the circuit's CZ
//! interaction graph and selects a normalized blockade radius. Step 2
//! places a small set of initially-empty hub traps, precomputes
//! collision-avoiding shuttle distances between all traps with grid-based
//! A*, and transpiles the circuit into a layered schedule, resolving each
//! blocked CZ by either SWAP routing or hub-mediated shuttling (with lazy
//! eviction) under a unified time/fidelity score.
//!
//! Metrics are analytic: execution time is the sum of per-layer maximum
//! durations, and the fidelity proxy is accumulated in log domain. An
//! offline pass batches non-intersecting shuttle segments to estimate
//! parallel-transfer execution time.

pub mod error;
pub mod hubs;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod placement;
pub mod qasm;
pub mod render;
pub mod transpile;

pub use error::{CompileError, Result, TransportFailure};
pub use pipeline::{compile, CompileArtifact, CompileOptions, Outcome};
