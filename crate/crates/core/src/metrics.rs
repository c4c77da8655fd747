//! Analytic execution-time and log-domain fidelity estimation, the
//! parallel-shuttle batching pass, and the shuttle-fidelity sweep.
//!
//! Execution time is the sum over layers of the maximum operation duration
//! in each layer. The fidelity proxy multiplies per-gate fidelities with a
//! per-layer decoherence factor `exp(-t_max / T_eff)`; it is accumulated
//! entirely in natural-log units so deep schedules cannot underflow, and
//! the linear value is derived only for display.

use serde::{Deserialize, Serialize};

use crate::error::{CompileError, Result};
use crate::transpile::{Layout, OpKind, Schedule};

/// Fixed device operating point. Times in microseconds, distances in
/// micrometers, fidelities as probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatingPoint {
    pub r_b_phys: f64,
    pub d_min_phys: f64,
    pub t_1q: f64,
    pub t_cz: f64,
    pub t_act: f64,
    pub v_sh: f64,
    pub f_1q: f64,
    pub f_cz: f64,
    pub f_sh: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha_g: f64,
    pub alpha_s: f64,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            r_b_phys: 6.0,
            d_min_phys: 2.0,
            t_1q: 2.0,
            t_cz: 0.8,
            t_act: 100.0,
            v_sh: 0.55,
            f_1q: 0.999,
            f_cz: 0.995,
            f_sh: 1.0,
            t1: 1.0e8,
            t2: 1.5e6,
            alpha_g: 1.0,
            alpha_s: 1.0,
        }
    }
}

impl OperatingPoint {
    pub fn t_eff(&self) -> f64 {
        t_eff(self.t1, self.t2).expect("operating point invariant: T1, T2 > 0")
    }

    /// Serialized duration of one SWAP macro: 3 CZ + 4 single-qubit gates.
    pub fn swap_macro_duration(&self) -> f64 {
        3.0 * self.t_cz + 4.0 * self.t_1q
    }

    /// `-ln(F_CZ^3 * F_1Q^4)` for one SWAP macro.
    pub fn swap_macro_neg_log_fidelity(&self) -> f64 {
        3.0 * (-self.f_cz.ln()) + 4.0 * (-self.f_1q.ln())
    }
}

/// Effective decoherence time `T1*T2 / (T1 + T2)`.
pub fn t_eff(t1: f64, t2: f64) -> Result<f64> {
    if t1 <= 0.0 || t2 <= 0.0 {
        return Err(CompileError::DegenerateInput(format!(
            "T1 and T2 must be positive (T1={t1}, T2={t2})"
        )));
    }
    Ok(t1 * t2 / (t1 + t2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCounts {
    pub oneq: usize,
    pub cz: usize,
    pub swaps: usize,
    pub shuttles: usize,
    pub layers: usize,
}

pub fn count_ops(s: &Schedule) -> OpCounts {
    let mut c = OpCounts {
        layers: s.layers.len(),
        ..Default::default()
    };
    for layer in &s.layers {
        for op in layer {
            match op.kind {
                OpKind::OneQ { .. } => c.oneq += 1,
                OpKind::Cz { .. } => c.cz += 1,
                OpKind::SwapMacro { .. } => c.swaps += 1,
                OpKind::Shuttle { .. } => c.shuttles += 1,
            }
        }
    }
    c
}

fn layer_max_duration(layer: &[crate::transpile::ScheduledOp]) -> f64 {
    layer.iter().map(|op| op.duration_us).fold(0.0, f64::max)
}

/// Total execution time: sum over layers of the maximum op duration.
pub fn execution_time_us(s: &Schedule) -> f64 {
    s.layers.iter().map(|l| layer_max_duration(l)).sum()
}

/// Log-domain fidelity proxy. Per layer: decoherence `-t_max/T_eff` plus
/// `ln F` for each gate, `3 ln F_CZ + 4 ln F_1Q` per SWAP macro and
/// `ln F_sh` per shuttle.
pub fn log_fidelity(s: &Schedule, op: &OperatingPoint) -> f64 {
    let t_eff = op.t_eff();
    let ln_1q = op.f_1q.ln();
    let ln_cz = op.f_cz.ln();
    let ln_swap = 3.0 * ln_cz + 4.0 * ln_1q;
    let ln_sh = op.f_sh.ln();
    let mut total = 0.0;
    for layer in &s.layers {
        total -= layer_max_duration(layer) / t_eff;
        for o in layer {
            total += match o.kind {
                OpKind::OneQ { .. } => ln_1q,
                OpKind::Cz { .. } => ln_cz,
                OpKind::SwapMacro { .. } => ln_swap,
                OpKind::Shuttle { .. } => ln_sh,
            };
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct M2Result {
    /// Execution time after batching mutually compatible shuttles.
    pub m2_exec_time_us: f64,
    /// Number of transfer batches covering all shuttles.
    pub m2_batches: usize,
}

/// Closed segment intersection: proper crossings, collinear overlap and
/// endpoint touches all count as intersecting.
pub fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }
    fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
        p[0] >= a[0].min(b[0]) - 1e-15
            && p[0] <= a[0].max(b[0]) + 1e-15
            && p[1] >= a[1].min(b[1]) - 1e-15
            && p[1] <= a[1].max(b[1]) + 1e-15
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

struct ShuttleRef {
    layer: usize,
    op_index: usize,
    atom: usize,
    seg: ([f64; 2], [f64; 2]),
    duration: f64,
}

/// Offline pass batching shuttles whose travel segments are mutually
/// non-intersecting and whose atoms are otherwise idle across the batch's
/// contiguous layer window. Each batch is charged its maximum member
/// duration; gate counts, layer contents and fidelity are untouched.
pub fn batch_shuttles_m2(s: &Schedule, layout: &Layout) -> M2Result {
    // atoms touched per op, resolving SWAP macro occupants by replay
    let mut occ: Vec<usize> = (0..layout.num_homes()).collect(); // atom -> trap
    let mut trap_atom: Vec<Option<usize>> = vec![None; layout.traps.len()];
    for (atom, &t) in occ.iter().enumerate() {
        trap_atom[t] = Some(atom);
    }

    let mut op_atoms: Vec<Vec<Vec<usize>>> = Vec::with_capacity(s.layers.len());
    let mut shuttles: Vec<ShuttleRef> = Vec::new();
    for (li, layer) in s.layers.iter().enumerate() {
        let mut per_op = Vec::with_capacity(layer.len());
        for (oi, op) in layer.iter().enumerate() {
            let atoms = match op.kind {
                OpKind::OneQ { atom } => vec![atom],
                OpKind::Cz { a, b, .. } => vec![a, b],
                OpKind::SwapMacro { trap_a, trap_b } => {
                    let mut v = Vec::new();
                    if let Some(a) = trap_atom[trap_a] {
                        v.push(a);
                    }
                    if let Some(b) = trap_atom[trap_b] {
                        v.push(b);
                    }
                    v
                }
                OpKind::Shuttle { atom, from, to, .. } => {
                    shuttles.push(ShuttleRef {
                        layer: li,
                        op_index: oi,
                        atom,
                        seg: (layout.traps[from].position, layout.traps[to].position),
                        duration: op.duration_us,
                    });
                    vec![atom]
                }
            };
            per_op.push(atoms);
        }
        // apply moves after the layer (ops within a layer are simultaneous)
        for op in layer {
            if let OpKind::Shuttle { atom, from, to, .. } = op.kind {
                trap_atom[from] = None;
                trap_atom[to] = Some(atom);
                occ[atom] = to;
            }
        }
        op_atoms.push(per_op);
    }

    let base_time = execution_time_us(s);
    if shuttles.len() < 2 {
        return M2Result {
            m2_exec_time_us: base_time,
            m2_batches: shuttles.len(),
        };
    }

    // greedy left-to-right first-fit batching
    let mut batch_of = vec![usize::MAX; shuttles.len()];
    let mut batches: Vec<Vec<usize>> = Vec::new();
    for i in 0..shuttles.len() {
        if batch_of[i] != usize::MAX {
            continue;
        }
        let bid = batches.len();
        batch_of[i] = bid;
        let mut members = vec![i];
        for (j, slot) in batch_of.iter_mut().enumerate().skip(i + 1) {
            if *slot == usize::MAX && batch_admits(&op_atoms, &shuttles, &members, j) {
                *slot = bid;
                members.push(j);
            }
        }
        batches.push(members);
    }

    // the longest member of each batch keeps its duration, the rest are
    // absorbed into the same transfer
    let mut charged = vec![true; shuttles.len()];
    for members in &batches {
        let mut max_idx = members[0];
        for &m in members {
            if shuttles[m].duration > shuttles[max_idx].duration {
                max_idx = m;
            }
        }
        for &m in members {
            charged[m] = m == max_idx;
        }
    }

    let mut time = 0.0;
    for (li, layer) in s.layers.iter().enumerate() {
        let mut layer_max = 0.0f64;
        for (oi, op) in layer.iter().enumerate() {
            let dur = if matches!(op.kind, OpKind::Shuttle { .. }) {
                let k = shuttles
                    .iter()
                    .position(|sh| sh.layer == li && sh.op_index == oi)
                    .expect("every shuttle op was indexed");
                if charged[k] {
                    op.duration_us
                } else {
                    0.0
                }
            } else {
                op.duration_us
            };
            layer_max = layer_max.max(dur);
        }
        time += layer_max;
    }

    M2Result {
        m2_exec_time_us: time,
        m2_batches: batches.len(),
    }
}

fn batch_admits(
    op_atoms: &[Vec<Vec<usize>>],
    shuttles: &[ShuttleRef],
    members: &[usize],
    candidate: usize,
) -> bool {
    let cand = &shuttles[candidate];
    // (i) segments pairwise non-intersecting
    for &m in members {
        let sm = &shuttles[m];
        if segments_intersect(sm.seg.0, sm.seg.1, cand.seg.0, cand.seg.1) {
            return false;
        }
    }
    // (ii) every member inside a contiguous window of layers where no other
    // op acts on any batch atom
    let mut atoms: Vec<usize> = members.iter().map(|&m| shuttles[m].atom).collect();
    atoms.push(cand.atom);
    let lo = members
        .iter()
        .map(|&m| shuttles[m].layer)
        .chain([cand.layer])
        .min()
        .unwrap();
    let hi = members
        .iter()
        .map(|&m| shuttles[m].layer)
        .chain([cand.layer])
        .max()
        .unwrap();
    for (li, layer_atoms) in op_atoms.iter().enumerate().take(hi + 1).skip(lo) {
        for (oi, touched) in layer_atoms.iter().enumerate() {
            let is_member = members
                .iter()
                .chain([&candidate])
                .any(|&m| shuttles[m].layer == li && shuttles[m].op_index == oi);
            if is_member {
                continue;
            }
            if touched.iter().any(|a| atoms.contains(a)) {
                return false;
            }
        }
    }
    true
}

/// Recompute the log fidelity for each shuttle-fidelity value. Only the
/// shuttle term varies: the delta against `f_sh = 1` is
/// `#shuttles * ln(value)`.
pub fn sweep_fsh(s: &Schedule, op: &OperatingPoint, values: &[f64]) -> Vec<(f64, f64)> {
    values
        .iter()
        .map(|&v| {
            assert!(v > 0.0 && v <= 1.0, "F_sh values must lie in (0, 1]");
            let swept = OperatingPoint { f_sh: v, ..*op };
            (v, log_fidelity(s, &swept))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub exec_time_us: f64,
    /// Natural-log fidelity proxy; the primary fidelity field.
    pub log_fidelity: f64,
    /// `exp(log_fidelity)`; may underflow to 0 in display, the log value
    /// stays exact.
    pub fidelity: f64,
    pub counts: OpCounts,
    pub m2_exec_time_us: f64,
    pub m2_batches: usize,
}

pub fn metrics_report(s: &Schedule, layout: &Layout, op: &OperatingPoint) -> MetricsReport {
    let lf = log_fidelity(s, op);
    let m2 = batch_shuttles_m2(s, layout);
    MetricsReport {
        exec_time_us: execution_time_us(s),
        log_fidelity: lf,
        fidelity: lf.exp(),
        counts: count_ops(s),
        m2_exec_time_us: m2.m2_exec_time_us,
        m2_batches: m2.m2_batches,
    }
}
