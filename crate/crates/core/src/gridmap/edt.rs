//! Exact Euclidean distance transform (column scan + lower envelope of
//! parabolas per row). All intermediate values are squared integer cell
//! distances, so the result is exact before the final square root.

use super::{CellClass, CellIndex, OccupancyGrid};

/// Distance from every cell center to the nearest occupied or unknown cell
/// center, in meters. Obstacle cells read 0. Without any obstacle every
/// entry is `+inf` and [`ObstacleDistanceField::has_obstacles`] is false.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleDistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    squared_cells: Vec<u64>,
    distances: Vec<f64>,
    has_obstacles: bool,
}

impl ObstacleDistanceField {
    pub fn has_obstacles(&self) -> bool {
        self.has_obstacles
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Per-cell distances in meters, row-major.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn at(&self, cell: CellIndex) -> f64 {
        self.distances[cell.row * self.width + cell.col]
    }

    /// Squared distance in cell units; `u64::MAX` where no obstacle exists.
    pub fn squared_cells(&self, cell: CellIndex) -> u64 {
        self.squared_cells[cell.row * self.width + cell.col]
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }
}

const UNREACHED: u64 = u64::MAX;

pub fn distance_field(grid: &OccupancyGrid) -> ObstacleDistanceField {
    let (w, h) = (grid.width(), grid.height());
    let is_obstacle = |c: CellClass| c != CellClass::Free;
    let has_obstacles = grid.cells().iter().any(|&c| is_obstacle(c));

    // Column pass: vertical distance to the nearest obstacle in the column.
    let mut vertical = vec![UNREACHED; w * h];
    for col in 0..w {
        let mut last: Option<usize> = None;
        for row in 0..h {
            if is_obstacle(grid.cells()[row * w + col]) {
                last = Some(row);
            }
            if let Some(r) = last {
                vertical[row * w + col] = (row - r) as u64;
            }
        }
        let mut last: Option<usize> = None;
        for row in (0..h).rev() {
            if is_obstacle(grid.cells()[row * w + col]) {
                last = Some(row);
            }
            if let Some(r) = last {
                let d = (r - row) as u64;
                let cur = &mut vertical[row * w + col];
                if d < *cur {
                    *cur = d;
                }
            }
        }
    }

    // Row pass: lower envelope of parabolas (col - q)^2 + vertical(q)^2.
    let mut squared = vec![UNREACHED; w * h];
    let mut sites: Vec<usize> = Vec::with_capacity(w);
    let mut bounds: Vec<f64> = Vec::with_capacity(w + 1);
    for row in 0..h {
        let f = |q: usize| -> i64 {
            let v = vertical[row * w + q];
            (v * v) as i64
        };
        sites.clear();
        bounds.clear();
        for q in 0..w {
            if vertical[row * w + q] == UNREACHED {
                continue;
            }
            while let Some(&v) = sites.last() {
                let s = intersection(q, f(q), v, f(v));
                if s <= *bounds.last().unwrap() {
                    sites.pop();
                    bounds.pop();
                } else {
                    break;
                }
            }
            if sites.is_empty() {
                bounds.push(f64::NEG_INFINITY);
            } else {
                let v = *sites.last().unwrap();
                bounds.push(intersection(q, f(q), v, f(v)));
            }
            sites.push(q);
        }
        if sites.is_empty() {
            continue;
        }
        let mut k = 0;
        for col in 0..w {
            while k + 1 < sites.len() && bounds[k + 1] < col as f64 {
                k += 1;
            }
            let q = sites[k];
            let dc = col as i64 - q as i64;
            squared[row * w + col] = (dc * dc + f(q)) as u64;
        }
    }

    let resolution = grid.resolution();
    let distances = squared
        .iter()
        .map(|&s| {
            if s == UNREACHED {
                f64::INFINITY
            } else {
                (s as f64).sqrt() * resolution
            }
        })
        .collect();

    ObstacleDistanceField {
        width: w,
        height: h,
        resolution,
        squared_cells: squared,
        distances,
        has_obstacles,
    }
}

/// Abscissa where parabolas rooted at `q` and `v` (v < q) intersect.
fn intersection(q: usize, fq: i64, v: usize, fv: i64) -> f64 {
    let (q, v) = (q as i64, v as i64);
    ((fq + q * q) - (fv + v * v)) as f64 / (2 * (q - v)) as f64
}
