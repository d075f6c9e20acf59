//! Boustrophedon sweep baseline.
//!
//! Free space is split into vertical cells at column events: a cell keeps
//! growing to the right while each of its free intervals overlaps exactly
//! one interval of the next column and vice versa. Each cell is swept by
//! evenly spaced vertical lanes in alternating direction, cells are visited
//! nearest-first, and consecutive lanes are joined by A* paths. Viewpoints
//! are dropped at every lane end and whenever the sweep has travelled `r`
//! since the previous one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridmap::{CellIndex, OccupancyGrid};
use crate::pathplan::astar;

/// One vertical slice of a decomposition cell: rows `lo..=hi` of `col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub col: usize,
    pub lo: usize,
    pub hi: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepCell {
    /// Consecutive columns, left to right.
    pub slices: Vec<Slice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub cells: Vec<SweepCell>,
    /// Lane polylines as (start, end) cells, in sweep order.
    pub lanes: Vec<[CellIndex; 2]>,
    /// In sweep order; a cell passed twice appears twice.
    pub viewpoints: Vec<CellIndex>,
    pub lane_spacing: f64,
    /// Every cell the sweep passes through, in order.
    pub sweep: Vec<CellIndex>,
    /// Connections between lanes that had no grid path.
    pub jumps: usize,
}

impl SweepPlan {
    /// Distinct viewpoint cells, first occurrence order.
    pub fn unique_viewpoints(&self) -> Vec<CellIndex> {
        let mut seen = std::collections::HashSet::new();
        self.viewpoints
            .iter()
            .copied()
            .filter(|c| seen.insert(*c))
            .collect()
    }
}

fn column_intervals(grid: &OccupancyGrid, col: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut row = 0;
    while row < grid.height() {
        if grid.is_free(CellIndex::new(row, col)) {
            let lo = row;
            while row + 1 < grid.height() && grid.is_free(CellIndex::new(row + 1, col)) {
                row += 1;
            }
            out.push((lo, row));
        }
        row += 1;
    }
    out
}

fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// Column-event decomposition of the free space.
pub fn decompose(grid: &OccupancyGrid) -> Vec<SweepCell> {
    let mut done: Vec<SweepCell> = Vec::new();
    // (interval in previous column, cell under construction)
    let mut open: Vec<((usize, usize), SweepCell)> = Vec::new();
    for col in 0..grid.width() {
        let now = column_intervals(grid, col);
        let mut next: Vec<((usize, usize), SweepCell)> = Vec::with_capacity(now.len());
        let mut continued = vec![false; open.len()];
        for &iv in &now {
            let parents: Vec<usize> = (0..open.len())
                .filter(|&k| overlaps(open[k].0, iv))
                .collect();
            let single = parents.len() == 1
                && now
                    .iter()
                    .filter(|&&o| overlaps(open[parents[0]].0, o))
                    .count()
                    == 1;
            let slice = Slice {
                col,
                lo: iv.0,
                hi: iv.1,
            };
            if single {
                let k = parents[0];
                continued[k] = true;
                let mut cell = std::mem::replace(&mut open[k].1, SweepCell { slices: Vec::new() });
                cell.slices.push(slice);
                next.push((iv, cell));
            } else {
                next.push((
                    iv,
                    SweepCell {
                        slices: vec![slice],
                    },
                ));
            }
        }
        for (k, (_, cell)) in open.into_iter().enumerate() {
            if !continued[k] {
                done.push(cell);
            }
        }
        open = next;
    }
    done.extend(open.into_iter().map(|(_, c)| c));
    done.sort_by_key(|c| (c.slices[0].col, c.slices[0].lo));
    done
}

// Lane slices of one cell: `ceil(width / spacing)` lanes centred in equal
// column bands.
fn lane_slices(cell: &SweepCell, spacing_cells: f64) -> Vec<Slice> {
    let w = cell.slices.len();
    let m = ((w as f64 / spacing_cells) - 1e-9).ceil().max(1.0) as usize;
    (0..m)
        .map(|k| cell.slices[(2 * k + 1) * w / (2 * m)])
        .collect()
}

fn vertical_run(s: Slice, upward: bool) -> Vec<CellIndex> {
    let rows: Vec<usize> = if upward {
        (s.lo..=s.hi).collect()
    } else {
        (s.lo..=s.hi).rev().collect()
    };
    rows.into_iter().map(|r| CellIndex::new(r, s.col)).collect()
}

/// Lawnmower sweep with viewpoints at most `r` apart along the sweep.
pub fn bcd_plan(grid: &OccupancyGrid, r: f64, lane_spacing: f64) -> Result<SweepPlan> {
    if !(lane_spacing > 0.0) || !lane_spacing.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lane spacing must be > 0, got {lane_spacing}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sensor range must be > 0, got {r}"
        )));
    }
    let cells = decompose(grid);
    let spacing_cells = lane_spacing / grid.resolution();

    // Cells in nearest-first order from the first one.
    let lanes_per_cell: Vec<Vec<Slice>> = cells
        .iter()
        .map(|c| lane_slices(c, spacing_cells))
        .collect();
    let mut order = Vec::with_capacity(cells.len());
    let mut visited = vec![false; cells.len()];
    let mut here: Option<CellIndex> = None;
    for _ in 0..cells.len() {
        let next = (0..cells.len())
            .filter(|&k| !visited[k])
            .min_by_key(|&k| {
                let s = lanes_per_cell[k][0];
                let entry = CellIndex::new(s.lo, s.col);
                (here.map_or(0, |h| h.dist2(entry)), k)
            })
            .expect("unvisited cell remains");
        visited[next] = true;
        order.push(next);
        let last = *lanes_per_cell[next].last().unwrap();
        let upward = lanes_per_cell[next].len() % 2 == 1;
        here = Some(CellIndex::new(
            if upward { last.hi } else { last.lo },
            last.col,
        ));
    }

    let mut lanes = Vec::new();
    let mut sweep: Vec<CellIndex> = Vec::new();
    let mut turns: Vec<usize> = Vec::new();
    let mut jumps = 0;
    for &k in &order {
        for (j, &slice) in lanes_per_cell[k].iter().enumerate() {
            let run = vertical_run(slice, j % 2 == 0);
            let (start, end) = (run[0], *run.last().unwrap());
            if let Some(&prev) = sweep.last() {
                match astar(grid, prev, start)? {
                    Some(p) => sweep.extend_from_slice(&p.cells[1..]),
                    None => {
                        jumps += 1;
                        turns.push(sweep.len() - 1);
                        sweep.push(start);
                    }
                }
            } else {
                sweep.push(start);
            }
            turns.push(sweep.len() - 1);
            sweep.extend_from_slice(&run[1..]);
            turns.push(sweep.len() - 1);
            lanes.push([start, end]);
        }
    }

    let viewpoints = sample_viewpoints(grid, &sweep, &turns, r);
    Ok(SweepPlan {
        cells,
        lanes,
        viewpoints,
        lane_spacing,
        sweep,
        jumps,
    })
}

// Viewpoints at the marked sweep positions and wherever the arc length since
// the previous viewpoint would otherwise exceed `r`.
fn sample_viewpoints(
    grid: &OccupancyGrid,
    sweep: &[CellIndex],
    turns: &[usize],
    r: f64,
) -> Vec<CellIndex> {
    let mut marked = vec![false; sweep.len()];
    for &t in turns {
        marked[t] = true;
    }
    let mut out: Vec<CellIndex> = Vec::new();
    let mut since = 0.0;
    for (i, &cell) in sweep.iter().enumerate() {
        if i > 0 {
            let step = grid.distance(sweep[i - 1], cell);
            if since + step > r + 1e-9 {
                out.push(sweep[i - 1]);
                since = 0.0;
            }
            since += step;
        }
        if marked[i] || i == 0 || i + 1 == sweep.len() {
            out.push(cell);
            since = 0.0;
        }
    }
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::CellClass;

    #[test]
    fn empty_room_lanes() {
        let g = OccupancyGrid::filled(50, 50, 0.1, CellClass::Free).unwrap();
        let plan = bcd_plan(&g, 2.0, 2.0).unwrap();
        assert_eq!(plan.cells.len(), 1);
        let cols: Vec<usize> = plan.lanes.iter().map(|l| l[0].col).collect();
        assert_eq!(cols, vec![8, 25, 41]);
        assert!(plan.viewpoints.len() >= 9);
    }

    #[test]
    fn single_free_cell() {
        let g = OccupancyGrid::from_ascii(&["###", "#.#", "###"], 0.1).unwrap();
        let plan = bcd_plan(&g, 2.0, 2.0).unwrap();
        assert_eq!(plan.viewpoints, vec![CellIndex::new(1, 1)]);
    }

    #[test]
    fn obstacle_splits_cells() {
        let g = OccupancyGrid::from_ascii(
            &["..........", "....##....", "....##....", ".........."],
            1.0,
        )
        .unwrap();
        // left part, two cells around the block, right part
        assert_eq!(decompose(&g).len(), 4);
    }

    #[test]
    fn bad_spacing() {
        let g = OccupancyGrid::filled(5, 5, 0.1, CellClass::Free).unwrap();
        assert!(bcd_plan(&g, 2.0, 0.0).is_err());
    }
}
