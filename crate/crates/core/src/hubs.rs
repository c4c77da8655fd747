//! Step 2a: place initially-empty hub traps from CZ geometry.
//!
//! Candidates are the midpoints of long-range CZ pairs (those longer than
//! `long_range_factor * r_b`; all CZ pairs when none are long), optionally
//! extended with ring points around each endpoint at `ring_radius_factor *
//! r_b` in evenly spaced directions. Feasible candidates (at least
//! `d_min = r_b/3` from every home trap and every selected hub) are picked
//! greedily by an endpoint-proximity score weighted by CZ counts.

use serde::{Deserialize, Serialize};

use crate::qasm::InteractionGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum HubProvenance {
    Midpoint {
        pair: (usize, usize),
    },
    Ring {
        endpoint: usize,
        direction: usize,
    },
    /// Supplied by a layout override rather than the heuristic.
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubSet {
    pub positions: Vec<[f64; 2]>,
    pub provenance: Vec<HubProvenance>,
}

impl HubSet {
    pub fn empty() -> Self {
        Self {
            positions: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HubConfig {
    pub n_hub: usize,
    pub ring_enabled: bool,
    pub long_range_factor: f64,
    pub ring_radius_factor: f64,
    pub ring_directions: usize,
}

impl Default for HubConfig {
    fn default() -> Self {
        Self {
            n_hub: 8,
            ring_enabled: false,
            long_range_factor: 1.1,
            ring_radius_factor: 0.9,
            ring_directions: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HubCandidate {
    pub position: [f64; 2],
    pub provenance: HubProvenance,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// CZ pairs whose placed distance exceeds `factor * r_b`; when none do,
/// all CZ pairs. Pairs come out in ascending lexicographic order.
pub fn long_range_pairs(
    g: &InteractionGraph,
    coords: &[[f64; 2]],
    r_b: f64,
    factor: f64,
) -> Vec<(usize, usize)> {
    let threshold = factor * r_b;
    let long: Vec<(usize, usize)> = g
        .pairs()
        .filter(|&((i, j), _)| dist(coords[i], coords[j]) > threshold)
        .map(|(p, _)| p)
        .collect();
    if long.is_empty() {
        g.pairs().map(|(p, _)| p).collect()
    } else {
        long
    }
}

fn inside_unit_square(p: [f64; 2]) -> bool {
    (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])
}

/// Candidate generation in deterministic order: pairs ascending, midpoint
/// before rings, endpoint `i` before `j`, directions by ascending index.
/// Ring points falling outside `[0,1]^2` are dropped, not projected.
pub fn generate_candidates(
    pairs: &[(usize, usize)],
    coords: &[[f64; 2]],
    cfg: &HubConfig,
    r_b: f64,
) -> Vec<HubCandidate> {
    let mut out = Vec::new();
    for &(i, j) in pairs {
        let (xi, xj) = (coords[i], coords[j]);
        out.push(HubCandidate {
            position: [(xi[0] + xj[0]) / 2.0, (xi[1] + xj[1]) / 2.0],
            provenance: HubProvenance::Midpoint { pair: (i, j) },
        });
        if cfg.ring_enabled {
            let radius = cfg.ring_radius_factor * r_b;
            for &endpoint in &[i, j] {
                let center = coords[endpoint];
                for k in 0..cfg.ring_directions {
                    let angle = std::f64::consts::TAU * k as f64 / cfg.ring_directions as f64;
                    let p = [
                        center[0] + radius * angle.cos(),
                        center[1] + radius * angle.sin(),
                    ];
                    if inside_unit_square(p) {
                        out.push(HubCandidate {
                            position: p,
                            provenance: HubProvenance::Ring {
                                endpoint,
                                direction: k,
                            },
                        });
                    }
                }
            }
        }
    }
    out
}

/// Endpoint-proximity score, higher for candidates close to the endpoints
/// of frequently used long-range pairs:
/// `sum over (i,j) of w_ij * (1/(1+|x_i-c|) + 1/(1+|x_j-c|))`.
pub fn hub_score(
    candidate: [f64; 2],
    long_pairs: &[(usize, usize)],
    g: &InteractionGraph,
    coords: &[[f64; 2]],
) -> f64 {
    long_pairs
        .iter()
        .map(|&(i, j)| {
            let w = g.weight(i, j) as f64;
            w * (1.0 / (1.0 + dist(coords[i], candidate))
                + 1.0 / (1.0 + dist(coords[j], candidate)))
        })
        .sum()
}

/// Greedy hub selection. May return fewer than `n_hub` hubs when the
/// feasible candidate pool is exhausted.
pub fn place_hubs(g: &InteractionGraph, coords: &[[f64; 2]], r_b: f64, cfg: &HubConfig) -> HubSet {
    let d_min = r_b / 3.0;
    let long = long_range_pairs(g, coords, r_b, cfg.long_range_factor);
    let candidates = generate_candidates(&long, coords, cfg, r_b);
    // the score does not depend on already-selected hubs, so it is computed
    // once per candidate
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| hub_score(c.position, &long, g, coords))
        .collect();

    let feasible = |p: [f64; 2], selected: &[[f64; 2]]| {
        coords.iter().all(|&home| dist(home, p) >= d_min)
            && selected.iter().all(|&h| dist(h, p) >= d_min)
    };

    let mut taken = vec![false; candidates.len()];
    let mut hubs = HubSet::empty();
    while hubs.len() < cfg.n_hub {
        let mut best: Option<(usize, f64)> = None;
        for (idx, cand) in candidates.iter().enumerate() {
            if taken[idx] || !feasible(cand.position, &hubs.positions) {
                continue;
            }
            // ties keep the earliest candidate in generation order
            if best.is_none_or(|(_, s)| scores[idx] > s) {
                best = Some((idx, scores[idx]));
            }
        }
        let Some((idx, _)) = best else { break };
        taken[idx] = true;
        hubs.positions.push(candidates[idx].position);
        hubs.provenance.push(candidates[idx].provenance.clone());
    }
    hubs
}
