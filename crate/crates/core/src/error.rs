//! Error types shared across the compiler.

use serde::{Deserialize, Serialize};

/// Which transport routes were unavailable when a blocked CZ could not be
/// resolved. All three flags true means the pair is structurally closed
/// under the current layout and occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportFailure {
    pub swap_unavailable: bool,
    pub shuttle_unavailable: bool,
    pub eviction_unavailable: bool,
}

impl std::fmt::Display for TransportFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.swap_unavailable {
            parts.push("no SWAP path");
        }
        if self.shuttle_unavailable {
            parts.push("no empty trap in range");
        }
        if self.eviction_unavailable {
            parts.push("no evictable occupant");
        }
        if parts.is_empty() {
            parts.push("all routes available (internal inconsistency)");
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported gate `{name}` at line {line}; transpile to the 1Q + cz gate set first")]
    UnsupportedGate { name: String, line: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unknown trap id {0}")]
    UnknownTrap(usize),

    #[error("no valid transport for qubit pair {pair:?}{}: {reasons}",
            gate_index.map(|g| format!(" at gate {g}")).unwrap_or_default())]
    NoValidTransport {
        /// Logical qubit pair of the blocked CZ.
        pair: (usize, usize),
        /// Index of the offending gate in the input circuit, when known.
        gate_index: Option<usize>,
        reasons: TransportFailure,
    },

    #[error("compile budget exceeded after {elapsed_seconds:.2} s (budget {budget_seconds:.2} s)")]
    BudgetExceeded {
        elapsed_seconds: f64,
        budget_seconds: f64,
    },
}

pub type Result<T> = std::result::Result<T, CompileError>;
