//! Line-of-sight visibility under a sensor range, visible sets, their
//! contours, and coverage bookkeeping.
//!
//! Two free cells see each other when their centers are at most `r` meters
//! apart and every cell on the supercover of the segment joining the centers
//! is free.

mod contour;
mod kernel;
pub mod raster;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridmap::{CellIndex, OccupancyGrid, METRIC_EPS};

pub use kernel::{RayTrie, ShadowTable, VisibilityContext, SHADOW_TABLE_BUDGET_BYTES};

/// Range gate: squared cell distance `d2` against `range` meters.
pub(crate) fn within_range(d2: i64, resolution: f64, range: f64) -> bool {
    (d2 as f64).sqrt() * resolution <= range + METRIC_EPS
}

/// Unobstructed segment between two cells, ignoring range. Off-grid and
/// non-free cells block.
pub fn segment_clear(grid: &OccupancyGrid, a: CellIndex, b: CellIndex) -> bool {
    let (r0, c0) = (a.row as i64, a.col as i64);
    raster::walk_supercover(b.row as i64 - r0, b.col as i64 - c0, |dr, dc| {
        grid.is_free_signed(r0 + dr, c0 + dc)
    })
}

/// Visibility predicate between two free cells at sensor range `r` meters.
pub fn is_visible(grid: &OccupancyGrid, a: CellIndex, b: CellIndex, r: f64) -> Result<bool> {
    grid.require_free(a)?;
    grid.require_free(b)?;
    Ok(within_range(a.dist2(b), grid.resolution(), r) && segment_clear(grid, a, b))
}

/// The cells seen from `source`, with the set's contour.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibleSet {
    pub source: CellIndex,
    cells: FixedBitSet,
    count: usize,
    width: usize,
    pub contour: Vec<CellIndex>,
}

impl VisibleSet {
    /// Build from grid indices; the contour is traced immediately.
    pub fn from_indices(grid: &OccupancyGrid, source: CellIndex, indices: &[usize]) -> Self {
        let mut cells = FixedBitSet::with_capacity(grid.len());
        for &i in indices {
            cells.insert(i);
        }
        let count = cells.count_ones(..);
        let mut set = Self {
            source,
            cells,
            count,
            width: grid.width(),
            contour: Vec::new(),
        };
        set.contour = trace_contour(grid, &set.cells);
        set
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.col < self.width && self.cells.contains(cell.row * self.width + cell.col)
    }

    /// Membership over grid indices.
    pub fn bits(&self) -> &FixedBitSet {
        &self.cells
    }

    /// Member cells in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let w = self.width;
        self.cells.ones().map(move |i| CellIndex::new(i / w, i % w))
    }
}

/// All free cells visible from `source` within `r` meters.
pub fn visible_set(grid: &OccupancyGrid, source: CellIndex, r: f64) -> Result<VisibleSet> {
    grid.require_free(source)?;
    let ctx = VisibilityContext::new(grid, r);
    Ok(ctx.visible_set(source))
}

impl VisibilityContext<'_> {
    pub fn visible_set(&self, source: CellIndex) -> VisibleSet {
        let grid = self.grid();
        VisibleSet::from_indices(grid, source, &self.visible_indices(grid.index(source)))
    }
}

/// Contour of a visible set: members with a 4-neighbor outside the set,
/// ordered by clockwise boundary tracing from the smallest such cell.
pub fn contour(grid: &OccupancyGrid, set: &VisibleSet) -> Result<Vec<CellIndex>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(trace_contour(grid, &set.cells))
}

pub(crate) fn trace_contour(grid: &OccupancyGrid, cells: &FixedBitSet) -> Vec<CellIndex> {
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let member =
        |r: i64, c: i64| r >= 0 && c >= 0 && r < h && c < w && cells.contains((r * w + c) as usize);
    contour::trace(&member, cells.ones().map(|i| grid.cell_at(i)))
}

/// Boundary predicate over a bitset, for callers that only need membership.
pub(crate) fn on_boundary(grid: &OccupancyGrid, cells: &FixedBitSet, cell: CellIndex) -> bool {
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let member =
        |r: i64, c: i64| r >= 0 && c >= 0 && r < h && c < w && cells.contains((r * w + c) as usize);
    contour::is_boundary(&member, cell)
}

/// Running union of covered free cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMask {
    covered: FixedBitSet,
    covered_count: usize,
    free_count: usize,
}

impl CoverageMask {
    pub fn new(grid: &OccupancyGrid) -> Self {
        Self {
            covered: FixedBitSet::with_capacity(grid.len()),
            covered_count: 0,
            free_count: grid.free_count(),
        }
    }

    /// Mark a cell covered; returns true when it was not covered before.
    pub fn insert(&mut self, index: usize) -> bool {
        let fresh = !self.covered.put(index);
        if fresh {
            self.covered_count += 1;
        }
        fresh
    }

    pub fn union_with(&mut self, set: &VisibleSet) -> usize {
        let before = self.covered_count;
        self.covered.union_with(set.bits());
        self.covered_count = self.covered.count_ones(..);
        self.covered_count - before
    }

    pub fn contains(&self, index: usize) -> bool {
        self.covered.contains(index)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.covered
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }
}

/// Covered share of the free cells. A grid without free cells is vacuously
/// fully covered.
pub fn coverage_fraction(mask: &CoverageMask) -> f64 {
    if mask.free_count == 0 {
        return 1.0;
    }
    mask.covered_count as f64 / mask.free_count as f64
}

/// Serializable coverage summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub covered: usize,
    pub free: usize,
    pub fraction: f64,
}

impl From<&CoverageMask> for CoverageSummary {
    fn from(mask: &CoverageMask) -> Self {
        Self {
            covered: mask.covered_count,
            free: mask.free_count,
            fraction: coverage_fraction(mask),
        }
    }
}
