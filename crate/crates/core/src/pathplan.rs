//! 8-connected A* between free cells.
//!
//! Step costs are one cell for orthogonal moves and √2 cells for diagonal
//! ones. A diagonal step is refused only when both orthogonal cells it
//! squeezes between are blocked. Costs are tracked as integer step counts so
//! equal-length paths compare equal exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridmap::{CellIndex, OccupancyGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub cells: Vec<CellIndex>,
    pub orthogonal_steps: usize,
    pub diagonal_steps: usize,
    /// Meters.
    pub length: f64,
}

impl GridPath {
    fn new(cells: Vec<CellIndex>, resolution: f64) -> Self {
        let diagonal_steps = cells
            .windows(2)
            .filter(|w| w[0].row != w[1].row && w[0].col != w[1].col)
            .count();
        let orthogonal_steps = cells.len().saturating_sub(1) - diagonal_steps;
        Self {
            length: step_length(orthogonal_steps, diagonal_steps, resolution),
            cells,
            orthogonal_steps,
            diagonal_steps,
        }
    }
}

pub fn step_length(orthogonal: usize, diagonal: usize, resolution: f64) -> f64 {
    resolution * (orthogonal as f64 + diagonal as f64 * std::f64::consts::SQRT_2)
}

/// Octile distance in cells between two cells.
pub fn octile(a: CellIndex, b: CellIndex) -> f64 {
    let dr = a.row.abs_diff(b.row);
    let dc = a.col.abs_diff(b.col);
    let (lo, hi) = (dr.min(dc), dr.max(dc));
    (hi - lo) as f64 + lo as f64 * std::f64::consts::SQRT_2
}

const MOVES: [(i64, i64); 8] = [
    (0, 1),
    (1, 0),
    (0, -1),
    (-1, 0),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (f, larger g first, index)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest 8-connected path from `from` to `to`, or `None` when they are
/// not connected.
pub fn astar(grid: &OccupancyGrid, from: CellIndex, to: CellIndex) -> Result<Option<GridPath>> {
    grid.require_free(from)?;
    grid.require_free(to)?;
    let n = grid.len();
    let (start, goal) = (grid.index(from), grid.index(to));
    // (orthogonal, diagonal) step counts of the best known path
    let mut steps: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX); n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let cost = |s: (u32, u32)| s.0 as f64 + s.1 as f64 * std::f64::consts::SQRT_2;
    let mut open = BinaryHeap::new();
    steps[start] = (0, 0);
    open.push(Entry {
        f: octile(from, to),
        g: 0.0,
        index: start,
    });
    while let Some(Entry { index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == goal {
            break;
        }
        let cell = grid.cell_at(index);
        let (r, c) = (cell.row as i64, cell.col as i64);
        for &(dr, dc) in &MOVES {
            let (nr, nc) = (r + dr, c + dc);
            if !grid.is_free_signed(nr, nc) {
                continue;
            }
            let diagonal = dr != 0 && dc != 0;
            if diagonal && !grid.is_free_signed(r + dr, c) && !grid.is_free_signed(r, c + dc) {
                continue;
            }
            let next = nr as usize * grid.width() + nc as usize;
            if closed[next] {
                continue;
            }
            let (o, d) = steps[index];
            let cand = if diagonal { (o, d + 1) } else { (o + 1, d) };
            if steps[next].0 == u32::MAX || cost(cand) < cost(steps[next]) {
                steps[next] = cand;
                parent[next] = index;
                let g = cost(cand);
                open.push(Entry {
                    f: g + octile(grid.cell_at(next), to),
                    g,
                    index: next,
                });
            }
        }
    }
    if !closed[goal] {
        return Ok(None);
    }
    let mut cells = vec![to];
    let mut at = goal;
    while at != start {
        at = parent[at];
        cells.push(grid.cell_at(at));
    }
    cells.reverse();
    Ok(Some(GridPath::new(cells, grid.resolution())))
}

/// A* path for every consecutive pair of `stops`, in order.
pub fn leg_paths(grid: &OccupancyGrid, stops: &[CellIndex]) -> Result<Vec<GridPath>> {
    stops
        .windows(2)
        .enumerate()
        .map(|(index, w)| {
            astar(grid, w[0], w[1])?.ok_or(Error::DisconnectedLeg {
                index,
                from: w[0],
                to: w[1],
            })
        })
        .collect()
}

/// Total A* length over consecutive stops, in meters.
pub fn tour_path_length(grid: &OccupancyGrid, stops: &[CellIndex]) -> Result<f64> {
    Ok(leg_paths(grid, stops)?
        .iter()
        .fold(0.0, |acc, p| acc + p.length))
}
