//! Grid-based A* shuttle distances between traps, memoized, plus the
//! shuttle duration model.
//!
//! The unit square is discretized into cells; cells whose centers lie
//! within `d_min` of any trap center are blocked, except that each query
//! unblocks the exclusion disks of its own source and destination traps.
//! Paths are 8-connected with orthogonal cost `cell_size` and diagonal
//! cost `sqrt(2) * cell_size` under the octile heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{CompileError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone)]
pub struct MotionGrid {
    cell_size: f64,
    side: usize,
    /// Cells within `d_min` of at least one trap center.
    base_blocked: Vec<bool>,
    traps: Vec<[f64; 2]>,
    trap_cells: Vec<(usize, usize)>,
    d_min: f64,
}

impl MotionGrid {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn num_traps(&self) -> usize {
        self.traps.len()
    }

    pub fn trap_cell(&self, trap: usize) -> Result<(usize, usize)> {
        self.trap_cells
            .get(trap)
            .copied()
            .ok_or(CompileError::UnknownTrap(trap))
    }

    fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            (ix as f64 + 0.5) * self.cell_size,
            (iy as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Whether a cell is blocked for a query between `src` and `dst`:
    /// inside some trap's exclusion disk and outside both endpoints' disks.
    pub fn blocked_for(&self, ix: usize, iy: usize, src: usize, dst: usize) -> bool {
        if !self.base_blocked[iy * self.side + ix] {
            return false;
        }
        let c = self.cell_center(ix, iy);
        !(dist(c, self.traps[src]) < self.d_min || dist(c, self.traps[dst]) < self.d_min)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Build the occupancy grid over `[0,1]^2`.
pub fn build_grid(traps: &[[f64; 2]], d_min: f64, cell_size: f64) -> Result<MotionGrid> {
    if cell_size <= 0.0 {
        return Err(CompileError::DegenerateInput(format!(
            "cell_size must be positive, got {cell_size}"
        )));
    }
    let side = (1.0 / cell_size).ceil().max(1.0) as usize;
    let mut base_blocked = vec![false; side * side];
    let cell_at = |p: [f64; 2]| -> (usize, usize) {
        let ix = ((p[0] / cell_size) as usize).min(side - 1);
        let iy = ((p[1] / cell_size) as usize).min(side - 1);
        (ix, iy)
    };

    for &t in traps {
        // only cells inside the bounding box of the exclusion disk can block
        let lo_x = (((t[0] - d_min) / cell_size).floor().max(0.0)) as usize;
        let lo_y = (((t[1] - d_min) / cell_size).floor().max(0.0)) as usize;
        let hi_x = ((((t[0] + d_min) / cell_size).ceil()) as usize).min(side - 1);
        let hi_y = ((((t[1] + d_min) / cell_size).ceil()) as usize).min(side - 1);
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                let c = [(ix as f64 + 0.5) * cell_size, (iy as f64 + 0.5) * cell_size];
                if dist(c, t) < d_min {
                    base_blocked[iy * side + ix] = true;
                }
            }
        }
    }

    let trap_cells = traps.iter().map(|&t| cell_at(t)).collect();
    Ok(MotionGrid {
        cell_size,
        side,
        base_blocked,
        traps: traps.to_vec(),
        trap_cells,
        d_min,
    })
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    f: f64,
    g: f64,
    cell: usize,
    // integer step counts so path cost is a pure function of (orth, diag)
    orth: u32,
    diag: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (f, g, cell) via reversed comparison
        other
            .f
            .partial_cmp(&self.f)
            .unwrap()
            .then(other.g.partial_cmp(&self.g).unwrap())
            .then(other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(cell_size: f64, dx: usize, dy: usize) -> f64 {
    let (hi, lo) = if dx >= dy { (dx, dy) } else { (dy, dx) };
    cell_size * (hi as f64 + (SQRT_2 - 1.0) * lo as f64)
}

fn step_cost(cell_size: f64, orth: u32, diag: u32) -> f64 {
    cell_size * (orth as f64 + SQRT_2 * diag as f64)
}

/// Shortest collision-avoiding path length between two traps, or `None`
/// when no path exists. The result is clamped from below by the straight
/// line distance between the trap positions, which grid quantization can
/// otherwise undershoot.
pub fn astar_distance(grid: &MotionGrid, from: usize, to: usize) -> Result<Option<f64>> {
    let (sx, sy) = grid.trap_cell(from)?;
    let (tx, ty) = grid.trap_cell(to)?;
    if from == to {
        return Ok(Some(0.0));
    }
    let euclid = dist(grid.traps[from], grid.traps[to]);
    if (sx, sy) == (tx, ty) {
        return Ok(Some(euclid));
    }

    let side = grid.side;
    let idx = |x: usize, y: usize| y * side + x;
    let mut best_g = vec![f64::INFINITY; side * side];
    let mut heap = BinaryHeap::new();
    best_g[idx(sx, sy)] = 0.0;
    heap.push(HeapEntry {
        f: octile(grid.cell_size, sx.abs_diff(tx), sy.abs_diff(ty)),
        g: 0.0,
        cell: idx(sx, sy),
        orth: 0,
        diag: 0,
    });

    while let Some(e) = heap.pop() {
        if e.cell == idx(tx, ty) {
            return Ok(Some(e.g.max(euclid)));
        }
        if e.g > best_g[e.cell] {
            continue;
        }
        let (cx, cy) = (e.cell % side, e.cell / side);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = cx as i64 + dx;
                let ny = cy as i64 + dy;
                if nx < 0 || ny < 0 || nx >= side as i64 || ny >= side as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if grid.blocked_for(nx, ny, from, to) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                let (orth, diag) = if diagonal {
                    (e.orth, e.diag + 1)
                } else {
                    (e.orth + 1, e.diag)
                };
                let g = step_cost(grid.cell_size, orth, diag);
                let ni = idx(nx, ny);
                if g < best_g[ni] {
                    best_g[ni] = g;
                    heap.push(HeapEntry {
                        f: g + octile(grid.cell_size, nx.abs_diff(tx), ny.abs_diff(ty)),
                        g,
                        cell: ni,
                        orth,
                        diag,
                    });
                }
            }
        }
    }
    Ok(None)
}

/// Symmetric memo of pairwise shuttle distances; `None` entries mark
/// unreachable pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCache {
    num_traps: usize,
    entries: Vec<Option<f64>>,
}

impl DistanceCache {
    fn slot(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        lo * self.num_traps + hi
    }

    pub fn num_traps(&self) -> usize {
        self.num_traps
    }

    pub fn get(&self, a: usize, b: usize) -> Result<Option<f64>> {
        if a >= self.num_traps || b >= self.num_traps {
            return Err(CompileError::UnknownTrap(a.max(b)));
        }
        if a == b {
            return Ok(Some(0.0));
        }
        Ok(self.entries[self.slot(a, b)])
    }
}

/// Deadline hook so long precomputations can respect a compile budget.
pub trait DeadlineCheck {
    fn check(&self) -> Result<()>;
}

pub struct NoDeadline;

impl DeadlineCheck for NoDeadline {
    fn check(&self) -> Result<()> {
        Ok(())
    }
}

/// Precompute all unordered pairwise distances with the default resolution
/// `cell_size = d_min / 2`.
pub fn precompute_distances(traps: &[[f64; 2]], d_min: f64) -> Result<DistanceCache> {
    precompute_distances_with(traps, d_min, d_min / 2.0, &NoDeadline)
}

pub fn precompute_distances_with(
    traps: &[[f64; 2]],
    d_min: f64,
    cell_size: f64,
    deadline: &dyn DeadlineCheck,
) -> Result<DistanceCache> {
    let grid = build_grid(traps, d_min, cell_size)?;
    let n = traps.len();
    let mut entries = vec![None; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            deadline.check()?;
            entries[a * n + b] = astar_distance(&grid, a, b)?;
        }
    }
    Ok(DistanceCache {
        num_traps: n,
        entries,
    })
}

/// Shuttle duration for a normalized travel distance `d`:
/// `2 * t_act + scale * d / v_sh` (microseconds).
pub fn shuttle_duration(d: f64, scale: f64, t_act: f64, v_sh: f64) -> Result<f64> {
    if v_sh <= 0.0 {
        return Err(CompileError::DegenerateInput(format!(
            "shuttle speed must be positive, got {v_sh}"
        )));
    }
    if d < 0.0 {
        return Err(CompileError::DegenerateInput(format!(
            "shuttle distance must be nonnegative, got {d}"
        )));
    }
    Ok(2.0 * t_act + scale * d / v_sh)
}
