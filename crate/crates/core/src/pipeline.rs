//! End-to-end compile driver and the self-contained compile artifact.
//!
//! The driver runs placement optimization, radius selection, separation
//! repair, hub placement, the A* distance precompute and the transpiler in
//! sequence under one wall-clock budget, then attaches the analytic
//! metrics. Everything a downstream command needs (validate, render,
//! sweep) is embedded in the artifact document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CompileError, Result, TransportFailure};
use crate::hubs::{place_hubs, HubConfig, HubProvenance, HubSet};
use crate::metrics::{metrics_report, MetricsReport, OperatingPoint};
use crate::motion::precompute_distances_with;
use crate::placement::{
    optimize_placement, placement_objective, repair_min_separation, scale_factor, select_radius,
    validate_min_separation, AnnealOptions, Placement, RadiusRule, RadiusSelection,
};
use crate::qasm::{interaction_graph, Circuit};
use crate::transpile::{transpile, CompileConfig, Deadline, Layout, Schedule};

/// Developer/test injection points that bypass the corresponding pipeline
/// stage. Overridden placements and hubs are validated against the
/// minimum separation but not repaired.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutOverrides {
    pub placement: Option<Vec<[f64; 2]>>,
    pub hubs: Option<Vec<[f64; 2]>>,
    pub r_b: Option<f64>,
}

impl LayoutOverrides {
    pub fn is_empty(&self) -> bool {
        self.placement.is_none() && self.hubs.is_none() && self.r_b.is_none()
    }
}

/// Full configuration document. The JSON config file mirrors these fields;
/// absent fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompileOptions {
    pub anneal: AnnealOptions,
    pub hubs: HubConfig,
    pub compile: CompileConfig,
    pub operating_point: OperatingPoint,
    pub overrides: LayoutOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    Ok,
    NoValidTransport {
        pair: (usize, usize),
        gate_index: Option<usize>,
        reasons: TransportFailure,
    },
    BudgetExceeded {
        elapsed_seconds: f64,
        budget_seconds: f64,
    },
}

impl Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok)
    }

    /// Process exit code the CLI maps this outcome to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::NoValidTransport { .. } => 3,
            Outcome::BudgetExceeded { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileArtifact {
    pub schema_version: u32,
    pub circuit_name: String,
    pub num_qubits: usize,
    pub total_gates: usize,
    pub cz_gates: usize,
    /// The parsed input circuit, embedded so the artifact is self-contained.
    pub circuit: Circuit,
    /// CZ interaction edges `(i, j, w_ij)` in lexicographic order.
    pub interaction: Vec<(usize, usize, u32)>,
    pub placement: Placement,
    pub radius: RadiusSelection,
    pub hubs: HubSet,
    pub layout: Layout,
    /// Echo of the options the compile ran under.
    pub config: CompileOptions,
    pub schedule: Option<Schedule>,
    pub metrics: Option<MetricsReport>,
    pub outcome: Outcome,
    pub compile_seconds: f64,
}

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

impl CompileArtifact {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifact serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CompileError::DegenerateInput(format!("malformed artifact JSON: {e}")))
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| {
            CompileError::DegenerateInput(format!("cannot write artifact {path:?}: {e}"))
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CompileError::DegenerateInput(format!("cannot read artifact {path:?}: {e}"))
        })?;
        Self::from_json(&text)
    }
}

/// Run the two-step pipeline on a parsed circuit. Transport and budget
/// failures become artifact outcomes (with no schedule); malformed inputs
/// surface as errors.
pub fn compile(circuit: &Circuit, opts: &CompileOptions) -> Result<CompileArtifact> {
    let deadline = Deadline::new(opts.compile.budget_seconds);
    if circuit.num_qubits == 0 {
        return Err(CompileError::DegenerateInput(
            "circuit declares no qubits".into(),
        ));
    }

    // keep the hub ring switch in lockstep with the method-matrix flag
    let mut opts = opts.clone();
    opts.hubs.ring_enabled = opts.compile.ring_enabled;

    let graph = interaction_graph(circuit);

    // Step 1: placement and radius
    let mut placement = match &opts.overrides.placement {
        Some(coords) => {
            if coords.len() != circuit.num_qubits {
                return Err(CompileError::DegenerateInput(format!(
                    "placement override has {} points for {} qubits",
                    coords.len(),
                    circuit.num_qubits
                )));
            }
            Placement {
                coords: coords.clone(),
                seed: opts.anneal.seed,
                objective_value: if coords.len() >= 2 {
                    placement_objective(&graph, coords)?
                } else {
                    0.0
                },
            }
        }
        None => optimize_placement(&graph, &opts.anneal),
    };
    deadline.check()?;

    let radius = match opts.overrides.r_b {
        Some(r_b) => RadiusSelection {
            r_b,
            rule: RadiusRule::Manual,
            scale_s: scale_factor(r_b, opts.operating_point.r_b_phys)?,
        },
        None if circuit.num_qubits >= 2 => {
            select_radius(&placement.coords, opts.operating_point.r_b_phys)?
        }
        // a single qubit never needs a blockade check; pick the unit radius
        None => RadiusSelection {
            r_b: 1.0,
            rule: RadiusRule::MstFallback,
            scale_s: opts.operating_point.r_b_phys,
        },
    };
    let d_min = radius.r_b / 3.0;

    if opts.overrides.placement.is_none() {
        repair_min_separation(&mut placement.coords, d_min, 1000);
    }
    let violations = validate_min_separation(&placement.coords, d_min);
    if !violations.is_empty() {
        return Err(CompileError::DegenerateInput(format!(
            "{} qubit pair(s) closer than d_min after repair, first {:?}",
            violations.len(),
            violations[0]
        )));
    }
    deadline.check()?;

    // Step 2a: hubs
    let hubs = match &opts.overrides.hubs {
        Some(positions) => HubSet {
            positions: positions.clone(),
            provenance: vec![HubProvenance::Manual; positions.len()],
        },
        None if opts.compile.hubs_enabled => {
            place_hubs(&graph, &placement.coords, radius.r_b, &opts.hubs)
        }
        None => HubSet::empty(),
    };
    let layout = Layout::new(&placement.coords, &hubs, radius.r_b, radius.scale_s);

    let interaction: Vec<(usize, usize, u32)> =
        graph.pairs().map(|((i, j), w)| (i, j, w)).collect();
    let base = |schedule: Option<Schedule>, metrics: Option<MetricsReport>, outcome: Outcome| {
        CompileArtifact {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            circuit_name: circuit.name.clone(),
            num_qubits: circuit.num_qubits,
            total_gates: circuit.gates.len(),
            cz_gates: circuit.cz_count(),
            circuit: circuit.clone(),
            interaction: interaction.clone(),
            placement: placement.clone(),
            radius,
            hubs: hubs.clone(),
            layout: layout.clone(),
            config: opts.clone(),
            schedule,
            metrics,
            outcome,
            compile_seconds: deadline.elapsed_seconds(),
        }
    };

    // precompute + transpile, mapping transport/budget failures to outcomes
    let cache = match precompute_distances_with(&layout.positions(), d_min, d_min / 2.0, &deadline)
    {
        Ok(cache) => cache,
        Err(CompileError::BudgetExceeded {
            elapsed_seconds,
            budget_seconds,
        }) => {
            return Ok(base(
                None,
                None,
                Outcome::BudgetExceeded {
                    elapsed_seconds,
                    budget_seconds,
                },
            ))
        }
        Err(other) => return Err(other),
    };

    match transpile(
        circuit,
        &layout,
        &cache,
        &opts.compile,
        &opts.operating_point,
        &deadline,
    ) {
        Ok(schedule) => {
            let metrics = metrics_report(&schedule, &layout, &opts.operating_point);
            Ok(base(Some(schedule), Some(metrics), Outcome::Ok))
        }
        Err(CompileError::NoValidTransport {
            pair,
            gate_index,
            reasons,
        }) => Ok(base(
            None,
            None,
            Outcome::NoValidTransport {
                pair,
                gate_index,
                reasons,
            },
        )),
        Err(CompileError::BudgetExceeded {
            elapsed_seconds,
            budget_seconds,
        }) => Ok(base(
            None,
            None,
            Outcome::BudgetExceeded {
                elapsed_seconds,
                budget_seconds,
            },
        )),
        Err(other) => Err(other),
    }
}
