//! Step 2b: transport-aware transpilation into a layered schedule.
//!
//! Gates are processed in a dependency-respecting order (program order
//! among ready gates). A CZ is executable when its atoms' traps are within
//! the normalized blockade radius; two CZs may share a layer only if every
//! cross-pair atom distance is at least the blockade radius. A blocked CZ
//! triggers the transport decision: SWAP routing along a shortest path in
//! the dynamic coupling graph of occupied traps versus shuttling one atom
//! to an empty trap near its partner (optionally freeing the trap first by
//! lazily evicting an idle occupant back to its home), scored by a unified
//! time/fidelity cost. Each transport step occupies its own layer.

use serde::{Deserialize, Serialize};

use crate::error::{CompileError, Result, TransportFailure};
use crate::hubs::HubSet;
use crate::metrics::OperatingPoint;
use crate::motion::{shuttle_duration, DistanceCache};
use crate::qasm::{dependency_dag, Circuit, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrapKind {
    /// Static trap initially holding the atom of one logical qubit.
    Home { owner: usize },
    /// Initially-empty transit trap.
    Hub,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trap {
    pub id: usize,
    pub position: [f64; 2],
    pub kind: TrapKind,
}

/// Trap table plus the normalized blockade radius and physical scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub traps: Vec<Trap>,
    pub r_b: f64,
    pub scale_s: f64,
}

impl Layout {
    pub fn new(home_coords: &[[f64; 2]], hubs: &HubSet, r_b: f64, scale_s: f64) -> Self {
        Self::from_positions(home_coords, &hubs.positions, r_b, scale_s)
    }

    pub fn from_positions(
        home_coords: &[[f64; 2]],
        hub_positions: &[[f64; 2]],
        r_b: f64,
        scale_s: f64,
    ) -> Self {
        let mut traps = Vec::with_capacity(home_coords.len() + hub_positions.len());
        for (q, &p) in home_coords.iter().enumerate() {
            traps.push(Trap {
                id: traps.len(),
                position: p,
                kind: TrapKind::Home { owner: q },
            });
        }
        for &p in hub_positions {
            traps.push(Trap {
                id: traps.len(),
                position: p,
                kind: TrapKind::Hub,
            });
        }
        Self {
            traps,
            r_b,
            scale_s,
        }
    }

    pub fn num_homes(&self) -> usize {
        self.traps
            .iter()
            .filter(|t| matches!(t.kind, TrapKind::Home { .. }))
            .count()
    }

    pub fn d_min(&self) -> f64 {
        self.r_b / 3.0
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.traps.iter().map(|t| t.position).collect()
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        let pa = self.traps[a].position;
        let pb = self.traps[b].position;
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
    }
}

/// Bijection between atoms and occupied traps, plus each atom's home.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    atom_trap: Vec<usize>,
    trap_atom: Vec<Option<usize>>,
    home_trap: Vec<usize>,
}

impl Occupancy {
    /// One atom per logical qubit, each at its home trap.
    pub fn initial(layout: &Layout) -> Self {
        let mut atom_trap = vec![usize::MAX; layout.num_homes()];
        let mut trap_atom = vec![None; layout.traps.len()];
        for trap in &layout.traps {
            if let TrapKind::Home { owner } = trap.kind {
                atom_trap[owner] = trap.id;
                trap_atom[trap.id] = Some(owner);
            }
        }
        let home_trap = atom_trap.clone();
        Self {
            atom_trap,
            trap_atom,
            home_trap,
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.atom_trap.len()
    }

    pub fn trap_of(&self, atom: usize) -> usize {
        self.atom_trap[atom]
    }

    pub fn atom_at(&self, trap: usize) -> Option<usize> {
        self.trap_atom[trap]
    }

    pub fn home_of(&self, atom: usize) -> usize {
        self.home_trap[atom]
    }

    pub fn at_home(&self, atom: usize) -> bool {
        self.atom_trap[atom] == self.home_trap[atom]
    }

    pub fn atom_traps(&self) -> &[usize] {
        &self.atom_trap
    }

    pub fn move_atom(&mut self, atom: usize, to: usize) -> Result<()> {
        if self.trap_atom[to].is_some() {
            return Err(CompileError::DegenerateInput(format!(
                "shuttle destination trap {to} is occupied"
            )));
        }
        let from = self.atom_trap[atom];
        self.trap_atom[from] = None;
        self.trap_atom[to] = Some(atom);
        self.atom_trap[atom] = to;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OpKind {
    OneQ {
        atom: usize,
    },
    Cz {
        a: usize,
        b: usize,
        /// Traps the atoms occupy when the gate executes.
        trap_a: usize,
        trap_b: usize,
    },
    /// Logical-state exchange between the atoms at two adjacent occupied
    /// traps (3 CZ + 4 1Q internally; opaque to the scheduler).
    SwapMacro {
        trap_a: usize,
        trap_b: usize,
    },
    Shuttle {
        atom: usize,
        from: usize,
        to: usize,
        /// Collision-avoiding path length in normalized units.
        path_length: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Index of the source gate in the input circuit.
    Gate(usize),
    /// Transport plan id and the gate it unblocks.
    Transport { plan: usize, gate: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub kind: OpKind,
    pub duration_us: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanKind {
    Swap,
    Shuttle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub kind: PlanKind,
    /// SwapMacro and/or Shuttle steps, in execution order.
    pub steps: Vec<ScheduledOp>,
    pub total_duration_us: f64,
    pub neg_log_fidelity: f64,
    /// Unified score, already divided by the route's alpha.
    pub score: f64,
    /// Destination trap of the main shuttle (shuttle plans only).
    pub target_trap: Option<usize>,
    pub uses_eviction: bool,
}

/// Per-decision instrumentation: which routes existed and what was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub gate_index: usize,
    pub chosen: PlanKind,
    pub swap_candidates: usize,
    pub shuttle_candidates: usize,
    pub eviction_candidates: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranspileStats {
    pub transport_decisions: Vec<DecisionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub layers: Vec<Vec<ScheduledOp>>,
    /// Trap of each atom after the last layer.
    pub final_atom_trap: Vec<usize>,
    /// Configuration the schedule was produced under.
    pub config: CompileConfig,
    pub stats: TranspileStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompileConfig {
    pub hubs_enabled: bool,
    pub eviction_enabled: bool,
    pub ring_enabled: bool,
    pub alpha_g: f64,
    pub alpha_s: f64,
    pub budget_seconds: f64,
    pub eviction_depth_cap: usize,
    /// Multiplier on r_b for the CZ-CZ parallelism conflict radius.
    pub blockade_parallel_factor: f64,
}

impl Default for CompileConfig {
    fn default() -> Self {
        Self {
            hubs_enabled: true,
            eviction_enabled: true,
            ring_enabled: true,
            alpha_g: 1.0,
            alpha_s: 1.0,
            budget_seconds: 900.0,
            eviction_depth_cap: 8,
            blockade_parallel_factor: 1.0,
        }
    }
}

/// The four pipeline configurations: the full method and its ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ProposedRing,
    Proposed,
    NoEviction,
    NoHub,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::ProposedRing,
        Method::Proposed,
        Method::NoEviction,
        Method::NoHub,
    ];

    /// (hubs_enabled, eviction_enabled, ring_enabled)
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            Method::ProposedRing => (true, true, true),
            Method::Proposed => (true, true, false),
            Method::NoEviction => (true, false, false),
            Method::NoHub => (false, false, false),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ProposedRing => "proposed-ring",
            Method::Proposed => "proposed",
            Method::NoEviction => "no-eviction",
            Method::NoHub => "no-hub",
        }
    }

    pub fn apply(self, cfg: &mut CompileConfig) {
        let (hubs, eviction, ring) = self.flags();
        cfg.hubs_enabled = hubs;
        cfg.eviction_enabled = eviction;
        cfg.ring_enabled = ring;
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "proposed-ring" => Ok(Method::ProposedRing),
            "proposed" => Ok(Method::Proposed),
            "no-eviction" => Ok(Method::NoEviction),
            "no-hub" => Ok(Method::NoHub),
            other => Err(format!(
                "unknown method `{other}` (expected proposed-ring|proposed|no-eviction|no-hub)"
            )),
        }
    }
}

/// Wall-clock compile budget. On wasm targets there is no monotonic clock,
/// so the budget never trips there.
#[derive(Debug, Clone)]
pub struct Deadline {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
    budget_seconds: f64,
}

impl Deadline {
    pub fn new(budget_seconds: f64) -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
            budget_seconds,
        }
    }

    pub fn unlimited() -> Self {
        Self::new(f64::INFINITY)
    }

    pub fn elapsed_seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }

    pub fn check(&self) -> Result<()> {
        let elapsed = self.elapsed_seconds();
        if elapsed > self.budget_seconds {
            Err(CompileError::BudgetExceeded {
                elapsed_seconds: elapsed,
                budget_seconds: self.budget_seconds,
            })
        } else {
            Ok(())
        }
    }
}

impl crate::motion::DeadlineCheck for Deadline {
    fn check(&self) -> Result<()> {
        Deadline::check(self)
    }
}

/// A CZ is executable when the two atoms' traps are within r_b (closed).
pub fn cz_feasible(occ: &Occupancy, layout: &Layout, a: usize, b: usize) -> bool {
    layout.distance(occ.trap_of(a), occ.trap_of(b)) <= layout.r_b
}

fn cz_positions(layout: &Layout, op: &ScheduledOp) -> Option<([f64; 2], [f64; 2])> {
    match op.kind {
        OpKind::Cz { trap_a, trap_b, .. } => {
            Some((layout.traps[trap_a].position, layout.traps[trap_b].position))
        }
        _ => None,
    }
}

fn point_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Whether `op` may join `layer`. Only CZ-CZ blockade is checked: two CZs
/// conflict when any of the four cross-pair atom distances is strictly
/// below the conflict radius. 1Q gates and shuttles impose no constraint
/// beyond atom disjointness, which the scheduler maintains separately.
pub fn layer_admits(
    layer: &[ScheduledOp],
    layout: &Layout,
    op: &ScheduledOp,
    conflict_radius: f64,
) -> bool {
    let Some((pa, pb)) = cz_positions(layout, op) else {
        return true;
    };
    for other in layer {
        let Some((qa, qb)) = cz_positions(layout, other) else {
            continue;
        };
        let min_cross = point_dist(pa, qa)
            .min(point_dist(pa, qb))
            .min(point_dist(pb, qa))
            .min(point_dist(pb, qb));
        if min_cross < conflict_radius {
            return false;
        }
    }
    true
}

fn score_of(total_duration_us: f64, neg_log_fidelity: f64, op: &OperatingPoint, alpha: f64) -> f64 {
    (total_duration_us / op.t_eff() + neg_log_fidelity) / alpha
}

/// Unified plan score: `(t / T_eff - sum ln f_k) / alpha`.
pub fn plan_score(plan: &TransportPlan, op: &OperatingPoint, alpha: f64) -> f64 {
    score_of(plan.total_duration_us, plan.neg_log_fidelity, op, alpha)
}

/// Shared read-only context for one transport decision.
#[derive(Clone, Copy)]
pub struct TransportCtx<'a> {
    pub occ: &'a Occupancy,
    pub layout: &'a Layout,
    pub cache: &'a DistanceCache,
    pub cfg: &'a CompileConfig,
    pub op: &'a OperatingPoint,
    /// Atoms touched by any gate in the current ready set; never evicted.
    pub ready_atoms: &'a [bool],
}

/// SWAP route: shortest hop path in the coupling graph of occupied traps
/// (edges between pairs within r_b), moving `a`'s state adjacent to `b`.
/// `None` when the endpoints are disconnected.
pub fn swap_plan(
    ctx: &TransportCtx<'_>,
    a: usize,
    b: usize,
    plan_id: usize,
    gate: usize,
) -> Option<TransportPlan> {
    let TransportCtx {
        occ, layout, op, ..
    } = *ctx;
    let start = occ.trap_of(a);
    let goal = occ.trap_of(b);
    // BFS with neighbors in ascending trap id for determinism
    let n = layout.traps.len();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    'bfs: while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if seen[v] || occ.atom_at(v).is_none() {
                continue;
            }
            if layout.distance(u, v) <= layout.r_b {
                seen[v] = true;
                parent[v] = Some(u);
                if v == goal {
                    break 'bfs;
                }
                queue.push_back(v);
            }
        }
    }
    if !seen[goal] {
        return None;
    }
    let mut path = vec![goal];
    while let Some(p) = parent[*path.last().unwrap()] {
        path.push(p);
    }
    path.reverse();
    if path.len() < 3 {
        // adjacent endpoints mean the CZ was feasible; nothing to do
        return None;
    }
    let swap_dur = op.swap_macro_duration();
    let swap_nlf = op.swap_macro_neg_log_fidelity();
    let steps: Vec<ScheduledOp> = path
        .windows(2)
        .take(path.len() - 2) // stop with a's state adjacent to b
        .map(|w| ScheduledOp {
            kind: OpKind::SwapMacro {
                trap_a: w[0],
                trap_b: w[1],
            },
            duration_us: swap_dur,
            provenance: Provenance::Transport {
                plan: plan_id,
                gate,
            },
        })
        .collect();
    let k = steps.len() as f64;
    let total = k * swap_dur;
    let nlf = k * swap_nlf;
    Some(TransportPlan {
        kind: PlanKind::Swap,
        steps,
        total_duration_us: total,
        neg_log_fidelity: nlf,
        score: score_of(total, nlf, op, ctx.cfg.alpha_g),
        target_trap: None,
        uses_eviction: false,
    })
}

/// Recursively build the shuttle steps that empty `trap`, sending each
/// idle occupant back to its home. Returns `None` when the chain is
/// blocked (busy occupant, home cycle, unreachable leg, or depth cap).
fn eviction_chain(
    ctx: &TransportCtx<'_>,
    trap: usize,
    forbidden: &[usize],
    plan_id: usize,
    gate: usize,
) -> Option<Vec<ScheduledOp>> {
    fn rec(
        ctx: &TransportCtx<'_>,
        trap: usize,
        depth: usize,
        chain_traps: &mut Vec<usize>,
        steps: &mut Vec<ScheduledOp>,
        plan_id: usize,
        gate: usize,
    ) -> bool {
        if depth > ctx.cfg.eviction_depth_cap {
            return false;
        }
        let Some(atom) = ctx.occ.atom_at(trap) else {
            return true; // already empty
        };
        if ctx.ready_atoms[atom] {
            return false; // busy atoms stay put
        }
        let home = ctx.occ.home_of(atom);
        if home == trap || chain_traps.contains(&home) {
            return false;
        }
        chain_traps.push(home);
        if ctx.occ.atom_at(home).is_some()
            && !rec(ctx, home, depth + 1, chain_traps, steps, plan_id, gate)
        {
            return false;
        }
        let Ok(Some(len)) = ctx.cache.get(trap, home) else {
            return false;
        };
        let Ok(dur) = shuttle_duration(len, ctx.layout.scale_s, ctx.op.t_act, ctx.op.v_sh) else {
            return false;
        };
        steps.push(ScheduledOp {
            kind: OpKind::Shuttle {
                atom,
                from: trap,
                to: home,
                path_length: len,
            },
            duration_us: dur,
            provenance: Provenance::Transport {
                plan: plan_id,
                gate,
            },
        });
        true
    }

    let mut chain_traps = forbidden.to_vec();
    chain_traps.push(trap);
    let mut steps = Vec::new();
    if rec(ctx, trap, 1, &mut chain_traps, &mut steps, plan_id, gate) {
        Some(steps)
    } else {
        None
    }
}

/// All shuttle candidates for a blocked CZ: for each direction, every trap
/// within r_b of the stationary atom yields either a single shuttle (empty
/// trap) or an eviction chain followed by the shuttle (idle occupant away
/// from its home, when eviction is enabled). Plans with an unreachable leg
/// are dropped.
pub fn shuttle_plans(
    ctx: &TransportCtx<'_>,
    a: usize,
    b: usize,
    plan_id: usize,
    gate: usize,
) -> Vec<TransportPlan> {
    let TransportCtx {
        occ,
        layout,
        cache,
        cfg,
        op,
        ..
    } = *ctx;
    let mut plans = Vec::new();
    for (mover, stationary) in [(a, b), (b, a)] {
        let stat_trap = occ.trap_of(stationary);
        let mover_trap = occ.trap_of(mover);
        for target in 0..layout.traps.len() {
            if target == stat_trap || target == mover_trap {
                continue;
            }
            if layout.distance(target, stat_trap) > layout.r_b {
                continue;
            }
            let mut steps = match occ.atom_at(target) {
                None => Vec::new(),
                Some(_) => {
                    if !cfg.eviction_enabled {
                        continue;
                    }
                    match eviction_chain(ctx, target, &[mover_trap, stat_trap], plan_id, gate) {
                        Some(chain) => chain,
                        None => continue,
                    }
                }
            };
            let uses_eviction = !steps.is_empty();
            let Ok(Some(len)) = cache.get(mover_trap, target) else {
                continue;
            };
            let Ok(dur) = shuttle_duration(len, layout.scale_s, op.t_act, op.v_sh) else {
                continue;
            };
            steps.push(ScheduledOp {
                kind: OpKind::Shuttle {
                    atom: mover,
                    from: mover_trap,
                    to: target,
                    path_length: len,
                },
                duration_us: dur,
                provenance: Provenance::Transport {
                    plan: plan_id,
                    gate,
                },
            });
            let total: f64 = steps.iter().map(|s| s.duration_us).sum();
            let nlf = steps.len() as f64 * (-op.f_sh.ln());
            plans.push(TransportPlan {
                kind: PlanKind::Shuttle,
                steps,
                total_duration_us: total,
                neg_log_fidelity: nlf,
                score: score_of(total, nlf, op, cfg.alpha_s),
                target_trap: Some(target),
                uses_eviction,
            });
        }
    }
    plans
}

fn plan_order(a: &TransportPlan, b: &TransportPlan) -> std::cmp::Ordering {
    // prefer lower score; exact ties prefer shuttling, then shorter total
    // duration, then lower target trap id
    a.score
        .partial_cmp(&b.score)
        .unwrap()
        .then_with(|| {
            let rank = |k: PlanKind| match k {
                PlanKind::Shuttle => 0u8,
                PlanKind::Swap => 1u8,
            };
            rank(a.kind).cmp(&rank(b.kind))
        })
        .then_with(|| {
            a.total_duration_us
                .partial_cmp(&b.total_duration_us)
                .unwrap()
        })
        .then_with(|| {
            a.target_trap
                .unwrap_or(usize::MAX)
                .cmp(&b.target_trap.unwrap_or(usize::MAX))
        })
}

/// Pick the minimum-score plan among the SWAP route and all shuttle
/// routes. Errors with the per-route availability triple when no plan
/// exists. The returned error carries the atom pair; the transpiler
/// rewrites it to the logical qubit pair.
pub fn decide_transport(
    ctx: &TransportCtx<'_>,
    a: usize,
    b: usize,
    plan_id: usize,
    gate: usize,
) -> Result<(TransportPlan, DecisionRecord)> {
    let swap = swap_plan(ctx, a, b, plan_id, gate);
    let shuttles = shuttle_plans(ctx, a, b, plan_id, gate);
    let direct = shuttles.iter().filter(|p| !p.uses_eviction).count();
    let evicting = shuttles.len() - direct;

    let mut candidates: Vec<TransportPlan> = shuttles;
    if let Some(s) = swap.clone() {
        candidates.push(s);
    }
    let best = candidates
        .into_iter()
        .min_by(plan_order)
        .ok_or(CompileError::NoValidTransport {
            pair: (a, b),
            gate_index: Some(gate),
            reasons: TransportFailure {
                swap_unavailable: true,
                shuttle_unavailable: direct == 0,
                eviction_unavailable: evicting == 0,
            },
        })?;
    let record = DecisionRecord {
        gate_index: gate,
        chosen: best.kind,
        swap_candidates: swap.is_some() as usize,
        shuttle_candidates: direct,
        eviction_candidates: evicting,
    };
    Ok((best, record))
}

struct SchedulerState {
    layers: Vec<Vec<ScheduledOp>>,
    /// Last layer containing an op on each atom, or None.
    atom_last_layer: Vec<Option<usize>>,
}

impl SchedulerState {
    fn new(num_atoms: usize) -> Self {
        Self {
            layers: Vec::new(),
            atom_last_layer: vec![None; num_atoms],
        }
    }

    fn earliest_after(&self, atoms: &[usize]) -> usize {
        atoms
            .iter()
            .filter_map(|&a| self.atom_last_layer[a].map(|l| l + 1))
            .max()
            .unwrap_or(0)
    }

    fn place_at(&mut self, layer: usize, op: ScheduledOp, atoms: &[usize]) {
        while self.layers.len() <= layer {
            self.layers.push(Vec::new());
        }
        self.layers[layer].push(op);
        for &a in atoms {
            self.atom_last_layer[a] = Some(layer);
        }
    }

    fn append(&mut self, op: ScheduledOp, atoms: &[usize]) -> usize {
        let layer = self.layers.len();
        self.place_at(layer, op, atoms);
        layer
    }
}

/// Transpile a circuit over a fixed layout into a layered schedule.
pub fn transpile(
    circuit: &Circuit,
    layout: &Layout,
    cache: &DistanceCache,
    cfg: &CompileConfig,
    op: &OperatingPoint,
    deadline: &Deadline,
) -> Result<Schedule> {
    let n_atoms = circuit.num_qubits;
    debug_assert_eq!(n_atoms, layout.num_homes());

    let dag = dependency_dag(circuit);
    let n_gates = circuit.gates.len();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n_gates];
    let mut pending: Vec<usize> = vec![0; n_gates];
    for (i, count) in pending.iter_mut().enumerate() {
        *count = dag.preds(i).len();
        for &p in dag.preds(i) {
            succs[p].push(i);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n_gates).filter(|&i| pending[i] == 0).collect();

    let mut occ = Occupancy::initial(layout);
    // logical qubit -> atom, updated by SWAP macros
    let mut qubit_atom: Vec<usize> = (0..n_atoms).collect();
    let mut atom_qubit: Vec<usize> = (0..n_atoms).collect();
    let mut state = SchedulerState::new(n_atoms);
    let mut stats = TranspileStats::default();
    let mut plan_counter = 0usize;
    let conflict_radius = layout.r_b * cfg.blockade_parallel_factor;

    while let Some(&g_idx) = ready.iter().next() {
        deadline.check()?;
        ready.remove(&g_idx);
        let gate = &circuit.gates[g_idx];
        match &gate.kind {
            GateKind::OneQ(_) => {
                let atom = qubit_atom[gate.qubits[0]];
                let layer = state.earliest_after(&[atom]);
                state.place_at(
                    layer,
                    ScheduledOp {
                        kind: OpKind::OneQ { atom },
                        duration_us: op.t_1q,
                        provenance: Provenance::Gate(g_idx),
                    },
                    &[atom],
                );
            }
            GateKind::Cz => {
                let (p, q) = (gate.qubits[0], gate.qubits[1]);
                if !cz_feasible(&occ, layout, qubit_atom[p], qubit_atom[q]) {
                    // atoms of every ready gate (this one included) are
                    // pinned: they cannot be evicted
                    let mut ready_atoms = vec![false; n_atoms];
                    for &g in ready.iter().chain([&g_idx]) {
                        for &qq in &circuit.gates[g].qubits {
                            ready_atoms[qubit_atom[qq]] = true;
                        }
                    }
                    let ctx = TransportCtx {
                        occ: &occ,
                        layout,
                        cache,
                        cfg,
                        op,
                        ready_atoms: &ready_atoms,
                    };
                    let (plan, record) =
                        decide_transport(&ctx, qubit_atom[p], qubit_atom[q], plan_counter, g_idx)
                            .map_err(|e| match e {
                            CompileError::NoValidTransport { reasons, .. } => {
                                CompileError::NoValidTransport {
                                    pair: (p, q),
                                    gate_index: Some(g_idx),
                                    reasons,
                                }
                            }
                            other => other,
                        })?;
                    plan_counter += 1;
                    stats.transport_decisions.push(record);
                    for step in plan.steps {
                        match step.kind {
                            OpKind::Shuttle { atom, to, .. } => {
                                occ.move_atom(atom, to)?;
                                state.append(step, &[atom]);
                            }
                            OpKind::SwapMacro { trap_a, trap_b } => {
                                let au = occ.atom_at(trap_a).expect("swap needs occupied traps");
                                let av = occ.atom_at(trap_b).expect("swap needs occupied traps");
                                let (qu, qv) = (atom_qubit[au], atom_qubit[av]);
                                atom_qubit.swap(au, av);
                                qubit_atom[qu] = av;
                                qubit_atom[qv] = au;
                                state.append(step, &[au, av]);
                            }
                            _ => unreachable!("transport plans contain only shuttles and swaps"),
                        }
                    }
                    debug_assert!(cz_feasible(&occ, layout, qubit_atom[p], qubit_atom[q]));
                }

                let (a, b) = (qubit_atom[p], qubit_atom[q]);
                let (ta, tb) = (occ.trap_of(a), occ.trap_of(b));
                let cz_op = ScheduledOp {
                    kind: OpKind::Cz {
                        a,
                        b,
                        trap_a: ta,
                        trap_b: tb,
                    },
                    duration_us: op.t_cz,
                    provenance: Provenance::Gate(g_idx),
                };
                let mut layer = state.earliest_after(&[a, b]);
                while layer < state.layers.len()
                    && !layer_admits(&state.layers[layer], layout, &cz_op, conflict_radius)
                {
                    layer += 1;
                }
                state.place_at(layer, cz_op, &[a, b]);
            }
        }
        for &s in &succs[g_idx] {
            pending[s] -= 1;
            if pending[s] == 0 {
                ready.insert(s);
            }
        }
    }

    Ok(Schedule {
        layers: state.layers,
        final_atom_trap: occ.atom_traps().to_vec(),
        config: cfg.clone(),
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    AtomReuse {
        layer: usize,
        atom: usize,
    },
    OccupancyMismatch {
        layer: usize,
        detail: String,
    },
    ShuttleInvalid {
        layer: usize,
        detail: String,
    },
    CzOutOfRange {
        layer: usize,
        atoms: (usize, usize),
        distance: f64,
    },
    SwapOutOfRange {
        layer: usize,
        traps: (usize, usize),
        distance: f64,
    },
    LayerBlockade {
        layer: usize,
        distance: f64,
    },
    DurationMismatch {
        layer: usize,
        expected: f64,
        found: f64,
    },
    LogicalMismatch {
        detail: String,
    },
    FinalOccupancyMismatch,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::AtomReuse { layer, atom } => {
                write!(f, "layer {layer}: atom {atom} used by two ops")
            }
            Violation::OccupancyMismatch { layer, detail } => {
                write!(f, "layer {layer}: occupancy mismatch: {detail}")
            }
            Violation::ShuttleInvalid { layer, detail } => {
                write!(f, "layer {layer}: invalid shuttle: {detail}")
            }
            Violation::CzOutOfRange { layer, atoms, distance } => write!(
                f,
                "layer {layer}: CZ on atoms {atoms:?} at distance {distance} exceeds r_b"
            ),
            Violation::SwapOutOfRange { layer, traps, distance } => write!(
                f,
                "layer {layer}: SWAP between traps {traps:?} at distance {distance} exceeds r_b"
            ),
            Violation::LayerBlockade { layer, distance } => write!(
                f,
                "layer {layer}: two CZs with cross-pair distance {distance} inside the blockade radius"
            ),
            Violation::DurationMismatch { layer, expected, found } => write!(
                f,
                "layer {layer}: op duration {found} does not match model value {expected}"
            ),
            Violation::LogicalMismatch { detail } => write!(f, "logical mismatch: {detail}"),
            Violation::FinalOccupancyMismatch => {
                write!(f, "stored final occupancy differs from replay")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub first_violation: Option<Violation>,
    pub layers_checked: usize,
    pub ops_checked: usize,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Replay a schedule from the initial occupancy and check every physical
/// and logical constraint; reports the first violation found.
pub fn validate_schedule(
    s: &Schedule,
    circuit: &Circuit,
    layout: &Layout,
    op: &OperatingPoint,
) -> ValidationReport {
    let mut ops_checked = 0usize;
    let fail = |v: Violation, layers: usize, ops: usize| ValidationReport {
        first_violation: Some(v),
        layers_checked: layers,
        ops_checked: ops,
    };

    let mut occ = Occupancy::initial(layout);
    let n_atoms = occ.num_atoms();
    let mut atom_qubit: Vec<usize> = (0..n_atoms).collect();
    let conflict_radius = layout.r_b * s.config.blockade_parallel_factor;
    // executed gate indices per logical qubit, for program-order comparison
    let mut per_qubit: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_qubits];
    let mut executed = 0usize;

    for (li, layer) in s.layers.iter().enumerate() {
        let mut used = vec![false; n_atoms];
        let mark = |atoms: &[usize], used: &mut Vec<bool>| -> Option<usize> {
            for &a in atoms {
                if used[a] {
                    return Some(a);
                }
                used[a] = true;
            }
            None
        };

        for sched_op in layer {
            ops_checked += 1;
            match sched_op.kind {
                OpKind::OneQ { atom } => {
                    if atom >= n_atoms {
                        return fail(
                            Violation::OccupancyMismatch {
                                layer: li,
                                detail: format!("unknown atom {atom}"),
                            },
                            li,
                            ops_checked,
                        );
                    }
                    if let Some(a) = mark(&[atom], &mut used) {
                        return fail(Violation::AtomReuse { layer: li, atom: a }, li, ops_checked);
                    }
                    if (sched_op.duration_us - op.t_1q).abs() > 0.0 {
                        return fail(
                            Violation::DurationMismatch {
                                layer: li,
                                expected: op.t_1q,
                                found: sched_op.duration_us,
                            },
                            li,
                            ops_checked,
                        );
                    }
                    if let Provenance::Gate(g) = sched_op.provenance {
                        let lq = atom_qubit[atom];
                        match circuit.gates.get(g) {
                            Some(gate)
                                if matches!(gate.kind, GateKind::OneQ(_))
                                    && gate.qubits == [lq] =>
                            {
                                per_qubit[lq].push(g);
                                executed += 1;
                            }
                            _ => {
                                return fail(
                                    Violation::LogicalMismatch {
                                        detail: format!(
                                            "1Q op claims gate {g} but acts on logical qubit {lq}"
                                        ),
                                    },
                                    li,
                                    ops_checked,
                                )
                            }
                        }
                    }
                }
                OpKind::Cz {
                    a,
                    b,
                    trap_a,
                    trap_b,
                } => {
                    if let Some(x) = mark(&[a, b], &mut used) {
                        return fail(Violation::AtomReuse { layer: li, atom: x }, li, ops_checked);
                    }
                    if occ.trap_of(a) != trap_a || occ.trap_of(b) != trap_b {
                        return fail(
                            Violation::OccupancyMismatch {
                                layer: li,
                                detail: format!(
                                    "CZ records traps ({trap_a}, {trap_b}) but atoms sit at ({}, {})",
                                    occ.trap_of(a),
                                    occ.trap_of(b)
                                ),
                            },
                            li,
                            ops_checked,
                        );
                    }
                    let d = layout.distance(trap_a, trap_b);
                    if d > layout.r_b {
                        return fail(
                            Violation::CzOutOfRange {
                                layer: li,
                                atoms: (a, b),
                                distance: d,
                            },
                            li,
                            ops_checked,
                        );
                    }
                    if (sched_op.duration_us - op.t_cz).abs() > 0.0 {
                        return fail(
                            Violation::DurationMismatch {
                                layer: li,
                                expected: op.t_cz,
                                found: sched_op.duration_us,
                            },
                            li,
                            ops_checked,
                        );
                    }
                    if let Provenance::Gate(g) = sched_op.provenance {
                        let (lp, lq) = (atom_qubit[a], atom_qubit[b]);
                        let matches_gate = circuit.gates.get(g).is_some_and(|gate| {
                            gate.kind == GateKind::Cz
                                && (gate.qubits == [lp, lq] || gate.qubits == [lq, lp])
                        });
                        if !matches_gate {
                            return fail(
                                Violation::LogicalMismatch {
                                    detail: format!(
                                        "CZ op claims gate {g} but acts on logical pair ({lp}, {lq})"
                                    ),
                                },
                                li,
                                ops_checked,
                            );
                        }
                        per_qubit[lp].push(g);
                        per_qubit[lq].push(g);
                        executed += 1;
                    }
                }
                OpKind::SwapMacro { trap_a, trap_b } => {
                    let (Some(au), Some(av)) = (occ.atom_at(trap_a), occ.atom_at(trap_b)) else {
                        return fail(
                            Violation::OccupancyMismatch {
                                layer: li,
                                detail: format!(
                                    "SWAP between traps ({trap_a}, {trap_b}) needs both occupied"
                                ),
                            },
                            li,
                            ops_checked,
                        );
                    };
                    if let Some(x) = mark(&[au, av], &mut used) {
                        return fail(Violation::AtomReuse { layer: li, atom: x }, li, ops_checked);
                    }
                    let d = layout.distance(trap_a, trap_b);
                    if d > layout.r_b {
                        return fail(
                            Violation::SwapOutOfRange {
                                layer: li,
                                traps: (trap_a, trap_b),
                                distance: d,
                            },
                            li,
                            ops_checked,
                        );
                    }
                    let expected = op.swap_macro_duration();
                    if (sched_op.duration_us - expected).abs() > 0.0 {
                        return fail(
                            Violation::DurationMismatch {
                                layer: li,
                                expected,
                                found: sched_op.duration_us,
                            },
                            li,
                            ops_checked,
                        );
                    }
                }
                OpKind::Shuttle {
                    atom,
                    from,
                    to,
                    path_length,
                } => {
                    if let Some(x) = mark(&[atom], &mut used) {
                        return fail(Violation::AtomReuse { layer: li, atom: x }, li, ops_checked);
                    }
                    if occ.trap_of(atom) != from {
                        return fail(
                            Violation::ShuttleInvalid {
                                layer: li,
                                detail: format!(
                                    "atom {atom} shuttles from trap {from} but sits at {}",
                                    occ.trap_of(atom)
                                ),
                            },
                            li,
                            ops_checked,
                        );
                    }
                    if occ.atom_at(to).is_some() {
                        return fail(
                            Violation::ShuttleInvalid {
                                layer: li,
                                detail: format!("destination trap {to} is occupied"),
                            },
                            li,
                            ops_checked,
                        );
                    }
                    let expected = shuttle_duration(path_length, layout.scale_s, op.t_act, op.v_sh)
                        .unwrap_or(f64::NAN);
                    if (sched_op.duration_us - expected).abs() > 0.0 {
                        return fail(
                            Violation::DurationMismatch {
                                layer: li,
                                expected,
                                found: sched_op.duration_us,
                            },
                            li,
                            ops_checked,
                        );
                    }
                }
            }
        }

        // CZ-CZ blockade within the layer
        for (i, op_a) in layer.iter().enumerate() {
            let Some((pa, pb)) = cz_positions(layout, op_a) else {
                continue;
            };
            for op_b in layer.iter().skip(i + 1) {
                let Some((qa, qb)) = cz_positions(layout, op_b) else {
                    continue;
                };
                let min_cross = point_dist(pa, qa)
                    .min(point_dist(pa, qb))
                    .min(point_dist(pb, qa))
                    .min(point_dist(pb, qb));
                if min_cross < conflict_radius {
                    return fail(
                        Violation::LayerBlockade {
                            layer: li,
                            distance: min_cross,
                        },
                        li,
                        ops_checked,
                    );
                }
            }
        }

        // apply state changes at layer end (ops are simultaneous and
        // atom-disjoint, so order does not matter)
        for sched_op in layer {
            match sched_op.kind {
                OpKind::Shuttle { atom, to, .. } => {
                    if occ.move_atom(atom, to).is_err() {
                        return fail(
                            Violation::ShuttleInvalid {
                                layer: li,
                                detail: "conflicting moves within one layer".into(),
                            },
                            li,
                            ops_checked,
                        );
                    }
                }
                OpKind::SwapMacro { trap_a, trap_b } => {
                    let (au, av) = (occ.atom_at(trap_a).unwrap(), occ.atom_at(trap_b).unwrap());
                    atom_qubit.swap(au, av);
                }
                _ => {}
            }
        }
    }

    // logical completeness: every gate executed exactly once, per-qubit
    // order equal to program order
    if executed != circuit.gates.len() {
        return fail(
            Violation::LogicalMismatch {
                detail: format!("{} of {} gates executed", executed, circuit.gates.len()),
            },
            s.layers.len(),
            ops_checked,
        );
    }
    for (q, seq) in per_qubit.iter().enumerate() {
        let expected: Vec<usize> = circuit
            .gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.qubits.contains(&q))
            .map(|(i, _)| i)
            .collect();
        if seq != &expected {
            return fail(
                Violation::LogicalMismatch {
                    detail: format!(
                        "qubit {q} executed gates {seq:?}, program order is {expected:?}"
                    ),
                },
                s.layers.len(),
                ops_checked,
            );
        }
    }
    if s.final_atom_trap != occ.atom_traps() {
        return fail(
            Violation::FinalOccupancyMismatch,
            s.layers.len(),
            ops_checked,
        );
    }

    ValidationReport {
        first_violation: None,
        layers_checked: s.layers.len(),
        ops_checked,
    }
}
