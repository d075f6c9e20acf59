//! Greedy viewpoint selection.
//!
//! The first viewpoint is the free cell with the largest visible set. Each
//! later viewpoint is drawn from the contour of the covered union: every
//! contour cell that would add coverage is scored by [`score`] and the best
//! one joins the set. Because candidates are covered cells, each new
//! viewpoint is visible from an earlier one, which gives the overlap needed
//! between neighbouring scans.
//!
//! Marginal gains are kept exact and incremental: when a cell becomes
//! covered, every cell that sees it (its own visible set, by symmetry) loses
//! one unit of gain.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridmap::{distance_field, CellIndex, OccupancyGrid};
use crate::visibility::{on_boundary, CoverageMask, VisibilityContext, VisibleSet};

/// Free-cell count up to which the first viewpoint is chosen by scanning
/// every free cell.
pub const EXACT_UNIVERSE_LIMIT: usize = 40_000;
pub const DEFAULT_CANDIDATE_STRIDE: usize = 4;

/// Viewpoint score: normalized marginal coverage minus an obstacle
/// proximity penalty, `setsize / maxsize - exp(-obstacle_distance)`.
pub fn score(setsize: usize, maxsize: usize, obstacle_distance: f64) -> f64 {
    debug_assert!(maxsize > 0 && setsize <= maxsize && obstacle_distance >= 0.0);
    setsize as f64 / maxsize as f64 - (-obstacle_distance).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverOptions {
    /// Stop once this share of the reachable free cells is covered.
    pub target: f64,
    pub exact_limit: usize,
    pub candidate_stride: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            target: 1.0,
            exact_limit: EXACT_UNIVERSE_LIMIT,
            candidate_stride: DEFAULT_CANDIDATE_STRIDE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Viewpoint {
    pub cell: CellIndex,
    pub visible: VisibleSet,
    /// Score at the moment of selection.
    pub score: f64,
    pub newly_covered: usize,
    /// False for the first viewpoint and for fallback picks.
    pub from_contour: bool,
}

/// A free-space component the planner could not reach from its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnreachableComponent {
    pub cells: usize,
    /// Smallest cell of the component.
    pub representative: CellIndex,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoverTimings {
    pub universe_s: f64,
    pub greedy_s: f64,
}

#[derive(Debug, Clone)]
pub struct ViewpointSet {
    pub viewpoints: Vec<Viewpoint>,
    pub mask: CoverageMask,
    pub r: f64,
    /// Free cells 4-connected to the first viewpoint.
    pub reachable_count: usize,
    /// Number of viewpoints chosen outside the contour because no contour
    /// cell added coverage.
    pub fallback_used: usize,
    /// Coverage target missed, or free space left unreachable.
    pub partial: bool,
    pub unreachable: Vec<UnreachableComponent>,
    pub timings: CoverTimings,
}

impl ViewpointSet {
    pub fn cells(&self) -> Vec<CellIndex> {
        self.viewpoints.iter().map(|v| v.cell).collect()
    }

    pub fn len(&self) -> usize {
        self.viewpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewpoints.is_empty()
    }

    pub fn reachable_fraction(&self) -> f64 {
        if self.reachable_count == 0 {
            return 1.0;
        }
        self.mask.covered_count() as f64 / self.reachable_count as f64
    }
}

fn candidates(grid: &OccupancyGrid, opts: &CoverOptions) -> Vec<usize> {
    let free: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.cells()[i].is_free())
        .collect();
    if free.len() <= opts.exact_limit || opts.candidate_stride <= 1 {
        return free;
    }
    let s = opts.candidate_stride;
    let lattice: Vec<usize> = free
        .iter()
        .copied()
        .filter(|&i| {
            let c = grid.cell_at(i);
            c.row.is_multiple_of(s) && c.col.is_multiple_of(s)
        })
        .collect();
    if lattice.is_empty() {
        free
    } else {
        lattice
    }
}

/// Largest visible set among the candidates; ties go to the smallest index.
/// Returns the chosen grid index and every candidate's set size.
fn pick_initial(ctx: &VisibilityContext, pool: &[usize]) -> Result<(usize, Vec<(usize, usize)>)> {
    let sizes: Vec<(usize, usize)> = pool.iter().map(|&i| (i, ctx.visible_count(i))).collect();
    let mut best: Option<(usize, usize)> = None;
    for &(i, n) in &sizes {
        if best.is_none_or(|(_, bn)| n > bn) {
            best = Some((i, n));
        }
    }
    best.map(|(i, _)| (i, sizes)).ok_or(Error::NoFreeCells)
}

/// The free cell with the largest visible set (ties by row-major index).
pub fn select_initial(grid: &OccupancyGrid, r: f64) -> Result<(CellIndex, VisibleSet)> {
    select_initial_with(grid, r, &CoverOptions::default())
}

pub fn select_initial_with(
    grid: &OccupancyGrid,
    r: f64,
    opts: &CoverOptions,
) -> Result<(CellIndex, VisibleSet)> {
    let ctx = VisibilityContext::new(grid, r);
    let (i, _) = pick_initial(&ctx, &candidates(grid, opts))?;
    let cell = grid.cell_at(i);
    Ok((cell, ctx.visible_set(cell)))
}

pub fn greedy_cover(grid: &OccupancyGrid, r: f64, target: f64) -> Result<ViewpointSet> {
    greedy_cover_with(
        grid,
        r,
        &CoverOptions {
            target,
            ..CoverOptions::default()
        },
    )
}

struct Gains<'a> {
    ctx: &'a VisibilityContext<'a>,
    gain: Vec<u32>,
    tracked: Vec<bool>,
}

impl Gains<'_> {
    fn get(&mut self, i: usize, mask: &CoverageMask) -> u32 {
        if !self.tracked[i] {
            let mut g = 0;
            self.ctx.for_each_visible(i, |j| {
                if !mask.contains(j) {
                    g += 1;
                }
            });
            self.gain[i] = g;
            self.tracked[i] = true;
        }
        self.gain[i]
    }

    /// Account for `cell` having just become covered.
    fn cover(&mut self, cell: usize) {
        let (gain, tracked) = (&mut self.gain, &self.tracked);
        self.ctx.for_each_visible(cell, |j| {
            if tracked[j] {
                gain[j] -= 1;
            }
        });
    }
}

pub fn greedy_cover_with(
    grid: &OccupancyGrid,
    r: f64,
    opts: &CoverOptions,
) -> Result<ViewpointSet> {
    if !(opts.target > 0.0 && opts.target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage target must be in (0, 1], got {}",
            opts.target
        )));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sensor range must be >= 0, got {r}"
        )));
    }
    if grid.free_count() == 0 {
        return Err(Error::NoFreeCells);
    }
    let t0 = Instant::now();
    let ctx = VisibilityContext::new(grid, r);
    let field = distance_field(grid);
    let pool = candidates(grid, opts);
    let (first, sizes) = pick_initial(&ctx, &pool)?;

    let mut gains = Gains {
        ctx: &ctx,
        gain: vec![0; grid.len()],
        tracked: vec![false; grid.len()],
    };
    for &(i, n) in &sizes {
        gains.gain[i] = n as u32;
        gains.tracked[i] = true;
    }
    let universe_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();

    let reachable = grid.component_mask(grid.cell_at(first));
    let reachable_count = reachable.iter().filter(|&&b| b).count();
    let goal = opts.target * reachable_count as f64;

    let mut mask = CoverageMask::new(grid);
    let mut is_viewpoint = vec![false; grid.len()];
    let mut viewpoints = Vec::new();
    let mut fallback_used = 0;

    let first_size = gains.get(first, &mask) as usize;
    let first_score = score(first_size, first_size, field.distances()[first]);
    add_viewpoint(
        &ctx,
        &mut gains,
        &mut mask,
        &mut is_viewpoint,
        &mut viewpoints,
        first,
        first_score,
        false,
    );

    while (mask.covered_count() as f64) + 1e-9 < goal {
        // Contour of the covered union, restricted to cells that add coverage.
        let mut pool: Vec<(usize, u32)> = Vec::new();
        let covered: Vec<usize> = mask.bits().ones().collect();
        for i in covered {
            if is_viewpoint[i] || !on_boundary(grid, mask.bits(), grid.cell_at(i)) {
                continue;
            }
            let g = gains.get(i, &mask);
            if g > 0 {
                pool.push((i, g));
            }
        }
        let from_contour = !pool.is_empty();
        if !from_contour {
            // Degenerate geometry: no contour cell sees anything new.
            for (i, _) in reachable.iter().enumerate().filter(|(_, &r)| r) {
                if !mask.contains(i) {
                    let g = gains.get(i, &mask);
                    if g > 0 {
                        pool.push((i, g));
                    }
                }
            }
            if pool.is_empty() {
                break;
            }
            fallback_used += 1;
        }
        let maxsize = pool.iter().map(|&(_, g)| g).max().unwrap_or(0) as usize;
        let mut best: Option<(usize, f64)> = None;
        for &(i, g) in &pool {
            let phi = score(g as usize, maxsize, field.distances()[i]);
            if best.is_none_or(|(_, b)| phi > b) {
                best = Some((i, phi));
            }
        }
        let (choice, phi) = best.expect("pool is non-empty");
        add_viewpoint(
            &ctx,
            &mut gains,
            &mut mask,
            &mut is_viewpoint,
            &mut viewpoints,
            choice,
            phi,
            from_contour,
        );
    }

    let start_cell = grid.cell_at(first);
    let unreachable: Vec<UnreachableComponent> = grid
        .free_components()
        .into_iter()
        .filter(|comp| comp.binary_search(&start_cell).is_err())
        .map(|comp| UnreachableComponent {
            cells: comp.len(),
            representative: comp[0],
        })
        .collect();
    let partial = (mask.covered_count() as f64) + 1e-9 < goal || !unreachable.is_empty();

    Ok(ViewpointSet {
        viewpoints,
        mask,
        r,
        reachable_count,
        fallback_used,
        partial,
        unreachable,
        timings: CoverTimings {
            universe_s,
            greedy_s: t1.elapsed().as_secs_f64(),
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn add_viewpoint(
    ctx: &VisibilityContext,
    gains: &mut Gains,
    mask: &mut CoverageMask,
    is_viewpoint: &mut [bool],
    viewpoints: &mut Vec<Viewpoint>,
    index: usize,
    score: f64,
    from_contour: bool,
) {
    let cell = ctx.grid().cell_at(index);
    let visible = ctx.visible_set(cell);
    let fresh: Vec<usize> = visible.bits().ones().filter(|&j| mask.insert(j)).collect();
    for &j in &fresh {
        gains.cover(j);
    }
    is_viewpoint[index] = true;
    viewpoints.push(Viewpoint {
        cell,
        visible,
        score,
        newly_covered: fresh.len(),
        from_contour,
    });
}

/// Union of the visible sets of `cells`, recomputed from scratch.
pub fn coverage_of(grid: &OccupancyGrid, cells: &[CellIndex], r: f64) -> CoverageMask {
    let ctx = VisibilityContext::new(grid, r);
    let mut mask = CoverageMask::new(grid);
    for &c in cells {
        if grid.is_free(c) {
            ctx.for_each_visible(grid.index(c), |j| {
                mask.insert(j);
            });
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::CellClass;

    #[test]
    fn score_values() {
        assert!((score(80, 100, 0.5) - (0.8 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((score(80, 100, 0.5) - 0.193_469_340_287_366_6).abs() < 1e-9);
        assert_eq!(score(7, 10, 0.0), 0.7 - 1.0);
        assert_eq!(score(10, 10, f64::INFINITY), 1.0);
    }

    #[test]
    fn single_free_cell() {
        let g = OccupancyGrid::from_ascii(&["###", "#.#", "###"], 0.1).unwrap();
        let (cell, set) = select_initial(&g, 2.0).unwrap();
        assert_eq!(cell, CellIndex::new(1, 1));
        assert_eq!(set.len(), 1);
        let vs = greedy_cover(&g, 2.0, 1.0).unwrap();
        assert_eq!(vs.len(), 1);
        assert!(!vs.partial);
    }

    #[test]
    fn no_free_cells() {
        let g = OccupancyGrid::filled(3, 3, 0.1, CellClass::Occupied).unwrap();
        assert!(matches!(select_initial(&g, 1.0), Err(Error::NoFreeCells)));
        assert!(matches!(
            greedy_cover(&g, 1.0, 1.0),
            Err(Error::NoFreeCells)
        ));
    }

    #[test]
    fn open_room_tie_breaks_to_smallest_index() {
        let g = OccupancyGrid::filled(8, 8, 0.1, CellClass::Free).unwrap();
        let (cell, set) = select_initial(&g, 5.0).unwrap();
        assert_eq!(cell, CellIndex::new(0, 0));
        assert_eq!(set.len(), 64);
        let vs = greedy_cover(&g, 5.0, 1.0).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs.reachable_fraction(), 1.0);
    }

    #[test]
    fn bad_target_rejected() {
        let g = OccupancyGrid::filled(3, 3, 0.1, CellClass::Free).unwrap();
        assert!(greedy_cover(&g, 1.0, 0.0).is_err());
        assert!(greedy_cover(&g, 1.0, 1.5).is_err());
    }

    #[test]
    fn disconnected_space_is_partial_not_endless() {
        let g = OccupancyGrid::from_ascii(&["....#..", "....#..", "....#.."], 0.1).unwrap();
        let vs = greedy_cover(&g, 1.0, 1.0).unwrap();
        assert!(vs.partial);
        assert_eq!(vs.reachable_count, 12);
        assert_eq!(vs.mask.covered_count(), 12);
        assert_eq!(
            vs.unreachable,
            vec![UnreachableComponent {
                cells: 6,
                representative: CellIndex::new(0, 5)
            }]
        );
    }

    #[test]
    fn tiny_range_uses_fallback_and_still_completes() {
        // r below one cell: every viewpoint sees only itself
        let g = OccupancyGrid::filled(3, 2, 0.1, CellClass::Free).unwrap();
        let vs = greedy_cover(&g, 0.05, 1.0).unwrap();
        assert_eq!(vs.len(), 6);
        assert!(vs.fallback_used > 0);
        assert!(!vs.partial);
    }

    #[test]
    fn corridor_viewpoints_overlap() {
        let g = OccupancyGrid::filled(60, 3, 0.1, CellClass::Free).unwrap();
        let vs = greedy_cover(&g, 1.0, 1.0).unwrap();
        assert_eq!(vs.mask.covered_count(), 180);
        for (k, v) in vs.viewpoints.iter().enumerate().skip(1) {
            assert!(v.from_contour);
            assert!(v.newly_covered > 0);
            let seen_before = vs.viewpoints[..k]
                .iter()
                .any(|u| u.visible.contains(v.cell));
            assert!(seen_before, "viewpoint {k} not visible from earlier ones");
        }
        let recomputed = coverage_of(&g, &vs.cells(), 1.0);
        assert_eq!(recomputed.bits(), vs.mask.bits());
    }
}
