//! Step 1: optimize normalized 2D qubit coordinates against the interaction
//! graph and select the normalized blockade radius.
//!
//! The objective is the Pearson correlation between per-pair CZ counts and
//! per-pair Euclidean distances over all unordered qubit pairs; heavily
//! interacting pairs drawn close make the correlation negative, so lower is
//! better. The optimizer is a seeded simulated annealer over the
//! `2|V|`-dimensional box `[0,1]^2` with geometric cooling and Gaussian
//! moves clipped to the box; a soft quadratic penalty discourages pairs
//! from collapsing below the minimum-separation scale, and a deterministic
//! local repair enforces it after the radius is selected.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CompileError, Result};
use crate::qasm::InteractionGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Per-qubit normalized coordinates in `[0,1]^2`.
    pub coords: Vec<[f64; 2]>,
    pub seed: u64,
    /// Final value of the annealing objective (correlation + penalty).
    pub objective_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusRule {
    /// Smallest candidate radius whose contact graph is connected with
    /// hop-diameter at most sqrt(|V|).
    ConnectedDiameter,
    /// Maximum edge weight of the Euclidean minimum spanning tree.
    MstFallback,
    /// Supplied by a layout override rather than the scan.
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSelection {
    /// Normalized blockade radius.
    pub r_b: f64,
    pub rule: RadiusRule,
    /// Physical micrometers per normalized distance unit.
    pub scale_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealOptions {
    pub maxiter: usize,
    pub seed: u64,
    pub separation_penalty_weight: f64,
    /// When false, the correlation is taken over interacting pairs only
    /// instead of all pairs.
    pub pearson_all_pairs: bool,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self {
            maxiter: 10_000,
            seed: 0,
            separation_penalty_weight: 1.0,
            pearson_all_pairs: true,
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

fn pearson(samples: &[(f64, f64)]) -> f64 {
    let m = samples.len();
    if m < 2 {
        return 0.0;
    }
    let n = m as f64;
    let mean_w = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_d = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_w = 0.0;
    let mut var_d = 0.0;
    for &(w, d) in samples {
        let dw = w - mean_w;
        let dd = d - mean_d;
        cov += dw * dd;
        var_w += dw * dw;
        var_d += dd * dd;
    }
    if var_w == 0.0 || var_d == 0.0 {
        return 0.0;
    }
    (cov / (var_w.sqrt() * var_d.sqrt())).clamp(-1.0, 1.0)
}

/// Pearson correlation between CZ counts and pairwise distances over all
/// unordered pairs (zero-weight pairs included), in `[-1, 1]`. Returns 0
/// when either vector has zero variance.
pub fn placement_objective(g: &InteractionGraph, coords: &[[f64; 2]]) -> Result<f64> {
    if coords.len() < 2 {
        return Err(CompileError::DegenerateInput(
            "placement objective needs at least 2 qubits".into(),
        ));
    }
    Ok(correlation_term(g, coords, true))
}

fn correlation_term(g: &InteractionGraph, coords: &[[f64; 2]], all_pairs: bool) -> f64 {
    let n = coords.len();
    let mut samples = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = g.weight(i, j);
            if all_pairs || w > 0 {
                samples.push((w as f64, dist(coords[i], coords[j])));
            }
        }
    }
    pearson(&samples)
}

/// Maximum edge weight of the Euclidean minimum spanning tree (Prim).
pub fn mst_max_edge(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut max_edge = 0.0f64;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut u_best = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < u_best {
                u_best = best[v];
                u = v;
            }
        }
        in_tree[u] = true;
        max_edge = max_edge.max(u_best);
        for v in 0..n {
            if !in_tree[v] {
                let d = dist(points[u], points[v]);
                if d < best[v] {
                    best[v] = d;
                }
            }
        }
    }
    max_edge
}

fn separation_penalty(coords: &[[f64; 2]]) -> f64 {
    let threshold = mst_max_edge(coords) / 3.0;
    if threshold <= 0.0 {
        return 0.0;
    }
    let n = coords.len();
    let mut p = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist(coords[i], coords[j]);
            if d < threshold {
                let s = (threshold - d) / threshold;
                p += s * s;
            }
        }
    }
    p
}

/// Combined annealing objective: correlation plus the soft separation
/// penalty. Exposed so tests can compare candidates on equal footing.
pub fn combined_objective(g: &InteractionGraph, coords: &[[f64; 2]], opts: &AnnealOptions) -> f64 {
    let corr = if coords.len() < 2 {
        0.0
    } else {
        correlation_term(g, coords, opts.pearson_all_pairs)
    };
    corr + opts.separation_penalty_weight * separation_penalty(coords)
}

/// The seeded initial candidate the annealer starts from.
pub fn initial_candidate(num_qubits: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_qubits)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect()
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u1 shifted away from 0
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Optimize qubit coordinates in `[0,1]^2`. Deterministic for a fixed
/// `(seed, maxiter)`: the same inputs produce bit-identical coordinates.
pub fn optimize_placement(g: &InteractionGraph, opts: &AnnealOptions) -> Placement {
    let n = g.num_qubits;
    if n == 0 {
        return Placement {
            coords: Vec::new(),
            seed: opts.seed,
            objective_value: 0.0,
        };
    }
    if n == 1 {
        return Placement {
            coords: vec![[0.5, 0.5]],
            seed: opts.seed,
            objective_value: 0.0,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut coords: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    let mut value = combined_objective(g, &coords, opts);
    let mut best_coords = coords.clone();
    let mut best_value = value;

    let t0 = 0.5f64;
    let t_min = 1e-4f64;
    let maxiter = opts.maxiter.max(1);
    for k in 0..maxiter {
        let frac = if maxiter > 1 {
            k as f64 / (maxiter - 1) as f64
        } else {
            0.0
        };
        let temp = t0 * (t_min / t0).powf(frac);
        let sigma = 0.02 + 0.5 * temp;

        let i = rng.gen_range(0..n);
        let old = coords[i];
        coords[i] = [
            (old[0] + sigma * gaussian(&mut rng)).clamp(0.0, 1.0),
            (old[1] + sigma * gaussian(&mut rng)).clamp(0.0, 1.0),
        ];
        let candidate = combined_objective(g, &coords, opts);
        let accept = candidate <= value || {
            let u: f64 = rng.gen();
            u < (-(candidate - value) / temp).exp()
        };
        if accept {
            value = candidate;
            if value < best_value {
                best_value = value;
                best_coords = coords.clone();
            }
        } else {
            coords[i] = old;
        }
    }

    Placement {
        coords: best_coords,
        seed: opts.seed,
        objective_value: best_value,
    }
}

/// Physical micrometers per normalized unit: `s = r_b_phys / r_b`.
pub fn scale_factor(r_b: f64, r_b_phys: f64) -> Result<f64> {
    if r_b <= 0.0 || r_b_phys <= 0.0 {
        return Err(CompileError::DegenerateInput(format!(
            "scale factor needs positive radii (r_b={r_b}, r_b_phys={r_b_phys})"
        )));
    }
    Ok(r_b_phys / r_b)
}

const CANDIDATE_DEDUP_TOL: f64 = 1e-12;

/// Scan candidate radii (sorted unique pairwise distances) and return the
/// smallest one whose contact graph is connected with hop-diameter at most
/// sqrt(|V|); fall back to the MST maximum edge when none qualifies.
pub fn select_radius(coords: &[[f64; 2]], r_b_phys: f64) -> Result<RadiusSelection> {
    let n = coords.len();
    if n < 2 {
        return Err(CompileError::DegenerateInput(
            "radius selection needs at least 2 qubits".into(),
        ));
    }
    let mut dists: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(dist(coords[i], coords[j]));
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // cluster near-equal candidates, keeping the largest representative so
    // every member of the cluster counts as inside the contact graph
    let mut candidates: Vec<f64> = Vec::new();
    for &d in &dists {
        if d <= CANDIDATE_DEDUP_TOL {
            continue;
        }
        match candidates.last_mut() {
            Some(last) if d - *last <= CANDIDATE_DEDUP_TOL => *last = d,
            _ => candidates.push(d),
        }
    }

    let limit = (n as f64).sqrt();
    for &r in &candidates {
        if let Some(diam) = contact_graph_diameter(coords, r) {
            if (diam as f64) <= limit {
                return Ok(RadiusSelection {
                    r_b: r,
                    rule: RadiusRule::ConnectedDiameter,
                    scale_s: scale_factor(r, r_b_phys)?,
                });
            }
        }
    }

    let r = mst_max_edge(coords);
    if r <= 0.0 {
        return Err(CompileError::DegenerateInput(
            "all qubit coordinates coincide; no usable radius".into(),
        ));
    }
    Ok(RadiusSelection {
        r_b: r,
        rule: RadiusRule::MstFallback,
        scale_s: scale_factor(r, r_b_phys)?,
    })
}

/// Hop diameter of the contact graph with edges for pairs within `r`;
/// `None` when disconnected.
fn contact_graph_diameter(coords: &[[f64; 2]], r: f64) -> Option<usize> {
    let n = coords.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(coords[i], coords[j]) <= r {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut diameter = 0usize;
    let mut depth = vec![usize::MAX; n];
    for start in 0..n {
        depth.fill(usize::MAX);
        depth[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut seen = 1usize;
        let mut ecc = 0usize;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    ecc = ecc.max(depth[v]);
                    seen += 1;
                    queue.push_back(v);
                }
            }
        }
        if seen < n {
            return None;
        }
        diameter = diameter.max(ecc);
    }
    Some(diameter)
}

/// All unordered pairs strictly closer than `d_min`, in lexicographic
/// order. Empty result means the layout is feasible; the boundary
/// (distance exactly `d_min`) is feasible.
pub fn validate_min_separation(points: &[[f64; 2]], d_min: f64) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(points[i], points[j]) < d_min {
                out.push((i, j));
            }
        }
    }
    out
}

/// Deterministic local repair: repeatedly push the closest violating pair
/// apart by equal and opposite displacements until no pair is closer than
/// `d_min` or the iteration cap is hit. Returns the iterations used.
pub fn repair_min_separation(coords: &mut [[f64; 2]], d_min: f64, max_iter: usize) -> usize {
    let n = coords.len();
    for iter in 0..max_iter {
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(coords[i], coords[j]);
                if d < d_min {
                    match worst {
                        Some((_, _, wd)) if wd <= d => {}
                        _ => worst = Some((i, j, d)),
                    }
                }
            }
        }
        let Some((i, j, d)) = worst else {
            return iter;
        };
        let target = d_min * (1.0 + 1e-9);
        let (ux, uy) = if d > 1e-15 {
            (
                (coords[j][0] - coords[i][0]) / d,
                (coords[j][1] - coords[i][1]) / d,
            )
        } else {
            // coincident points get a deterministic direction from the pair
            let theta =
                std::f64::consts::TAU * (0.618_033_988_749_895 * (i * n + j + 1) as f64).fract();
            (theta.cos(), theta.sin())
        };
        let push = (target - d) / 2.0;
        coords[i][0] = (coords[i][0] - ux * push).clamp(0.0, 1.0);
        coords[i][1] = (coords[i][1] - uy * push).clamp(0.0, 1.0);
        coords[j][0] = (coords[j][0] + ux * push).clamp(0.0, 1.0);
        coords[j][1] = (coords[j][1] + uy * push).clamp(0.0, 1.0);
    }
    max_iter
}
