//! Three-class occupancy grids and their preprocessing.
//!
//! Row 0 of an [`OccupancyGrid`] is the bottom row of the map (world `y`
//! grows with the row index), matching the map-server convention where the
//! sidecar origin names the lower-left corner. Image files and the textual
//! forms ([`OccupancyGrid::from_ascii`], the JSON dump) list rows top-first,
//! the way the picture looks.

mod edt;
mod io;
mod worlds;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edt::{distance_field, ObstacleDistanceField};
pub use io::{
    load_map, load_map_file, save_map, save_map_files, GridDump, MapMetadata, PgmEncoding,
};
pub use worlds::{generate_world, WorldKind, WorldRecipe};

/// Default grid resolution in meters per cell.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

/// Slack used when comparing metric distances against radii and ranges.
pub(crate) const METRIC_EPS: f64 = 1e-9;

/// Class of a single grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellClass {
    Free,
    Occupied,
    Unknown,
}

impl CellClass {
    pub fn is_free(self) -> bool {
        self == CellClass::Free
    }

    pub(crate) fn to_char(self) -> char {
        match self {
            CellClass::Free => '.',
            CellClass::Occupied => '#',
            CellClass::Unknown => '?',
        }
    }

    pub(crate) fn from_char(c: char) -> Option<Self> {
        match c {
            '.' | ' ' => Some(CellClass::Free),
            '#' => Some(CellClass::Occupied),
            '?' => Some(CellClass::Unknown),
            _ => None,
        }
    }
}

/// Address of a cell; `row` counts up from the bottom of the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Squared center-to-center distance in cell units.
    pub fn dist2(self, other: CellIndex) -> i64 {
        let dr = self.row as i64 - other.row as i64;
        let dc = self.col as i64 - other.col as i64;
        dr * dr + dc * dc
    }
}

/// World pose of cell (0, 0)'s lower-left corner. `theta` is carried for
/// file round trips only; planning ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Origin {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Origin,
    cells: Vec<CellClass>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Origin,
        cells: Vec<CellClass>,
    ) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::NonPositiveResolution(resolution));
        }
        if width * height != cells.len() {
            return Err(Error::InvalidGrid(format!(
                "{width}x{height} grid needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, resolution: f64, class: CellClass) -> Result<Self> {
        Self::new(
            width,
            height,
            resolution,
            Origin::default(),
            vec![class; width * height],
        )
    }

    /// Parse a picture of the map, first line = top row. `.` free, `#`
    /// occupied, `?` unknown.
    pub fn from_ascii(lines: &[&str], resolution: f64) -> Result<Self> {
        let height = lines.len();
        let width = lines.first().map_or(0, |l| l.chars().count());
        let mut cells = vec![CellClass::Free; width * height];
        for (i, line) in lines.iter().enumerate() {
            if line.chars().count() != width {
                return Err(Error::InvalidGrid(format!(
                    "ragged ascii map: line {i} has {} columns, expected {width}",
                    line.chars().count()
                )));
            }
            let row = height - 1 - i;
            for (col, ch) in line.chars().enumerate() {
                cells[row * width + col] = CellClass::from_char(ch).ok_or_else(|| {
                    Error::InvalidGrid(format!("unexpected map character {ch:?}"))
                })?;
            }
        }
        Self::new(width, height, resolution, Origin::default(), cells)
    }

    /// Inverse of [`OccupancyGrid::from_ascii`].
    pub fn to_ascii(&self) -> Vec<String> {
        (0..self.height)
            .rev()
            .map(|row| {
                self.cells[row * self.width..(row + 1) * self.width]
                    .iter()
                    .map(|c| c.to_char())
                    .collect()
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CellClass] {
        &self.cells
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn index(&self, cell: CellIndex) -> usize {
        debug_assert!(self.contains(cell));
        cell.row * self.width + cell.col
    }

    pub fn cell_at(&self, index: usize) -> CellIndex {
        CellIndex::new(index / self.width, index % self.width)
    }

    pub fn class(&self, cell: CellIndex) -> CellClass {
        self.cells[self.index(cell)]
    }

    pub fn get(&self, cell: CellIndex) -> Option<CellClass> {
        self.contains(cell).then(|| self.class(cell))
    }

    pub fn set(&mut self, cell: CellIndex, class: CellClass) {
        let i = self.index(cell);
        self.cells[i] = class;
    }

    pub fn is_free(&self, cell: CellIndex) -> bool {
        self.get(cell).is_some_and(CellClass::is_free)
    }

    /// Signed lookup; anything off the grid reads as not free.
    pub(crate) fn is_free_signed(&self, row: i64, col: i64) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.cells[row as usize * self.width + col as usize].is_free()
    }

    pub fn require_free(&self, cell: CellIndex) -> Result<()> {
        if !self.contains(cell) {
            return Err(Error::OutOfBounds(cell));
        }
        if !self.class(cell).is_free() {
            return Err(Error::NotFree(cell));
        }
        Ok(())
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.cells.iter().filter(|&&c| c == class).count()
    }

    pub fn free_count(&self) -> usize {
        self.count(CellClass::Free)
    }

    /// Free cells in row-major order.
    pub fn free_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_free())
            .map(|(i, _)| self.cell_at(i))
    }

    /// World coordinates of a cell center.
    pub fn world_xy(&self, cell: CellIndex) -> [f64; 2] {
        [
            self.origin.x + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.row as f64 + 0.5) * self.resolution,
        ]
    }

    /// Cell containing a world point, if it lies on the grid.
    pub fn cell_of_world(&self, x: f64, y: f64) -> Option<CellIndex> {
        let col = ((x - self.origin.x) / self.resolution).floor();
        let row = ((y - self.origin.y) / self.resolution).floor();
        if col < 0.0 || row < 0.0 {
            return None;
        }
        let cell = CellIndex::new(row as usize, col as usize);
        self.contains(cell).then_some(cell)
    }

    /// Center-to-center distance in meters.
    pub fn distance(&self, a: CellIndex, b: CellIndex) -> f64 {
        (a.dist2(b) as f64).sqrt() * self.resolution
    }

    /// In-grid 4-neighbors, in the order west, south, east, north.
    pub fn neighbors4(&self, cell: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        const STEPS: [(i64, i64); 4] = [(0, -1), (-1, 0), (0, 1), (1, 0)];
        STEPS.iter().filter_map(move |&(dr, dc)| {
            let r = cell.row as i64 + dr;
            let c = cell.col as i64 + dc;
            (r >= 0 && c >= 0 && (r as usize) < self.height && (c as usize) < self.width)
                .then(|| CellIndex::new(r as usize, c as usize))
        })
    }

    /// 4-connected components of free space, largest first (ties by
    /// smallest member index). Each component lists its cells in row-major
    /// order.
    pub fn free_components(&self) -> Vec<Vec<CellIndex>> {
        let mut label = vec![usize::MAX; self.len()];
        let mut components = Vec::new();
        for start in 0..self.len() {
            if label[start] != usize::MAX || !self.cells[start].is_free() {
                continue;
            }
            let id = components.len();
            let mut members = Vec::new();
            let mut queue = VecDeque::from([start]);
            label[start] = id;
            while let Some(i) = queue.pop_front() {
                let cell = self.cell_at(i);
                members.push(cell);
                for n in self.neighbors4(cell) {
                    let j = self.index(n);
                    if label[j] == usize::MAX && self.cells[j].is_free() {
                        label[j] = id;
                        queue.push_back(j);
                    }
                }
            }
            members.sort();
            components.push(members);
        }
        components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        components
    }

    /// Free cells 4-connected to `seed` (including it), as a mask over grid
    /// indices.
    pub fn component_mask(&self, seed: CellIndex) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        if !self.is_free(seed) {
            return mask;
        }
        let start = self.index(seed);
        mask[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for n in self.neighbors4(self.cell_at(i)) {
                let j = self.index(n);
                if !mask[j] && self.cells[j].is_free() {
                    mask[j] = true;
                    queue.push_back(j);
                }
            }
        }
        mask
    }
}

/// Grow obstacles: every free cell whose center lies within `radius` meters
/// of an occupied or unknown cell center becomes occupied.
pub fn inflate(grid: &OccupancyGrid, radius: f64) -> Result<OccupancyGrid> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inflation radius must be >= 0, got {radius}"
        )));
    }
    let mut out = grid.clone();
    if radius == 0.0 {
        return Ok(out);
    }
    let field = distance_field(grid);
    if !field.has_obstacles() {
        return Ok(out);
    }
    for (i, class) in out.cells.iter_mut().enumerate() {
        if class.is_free() && field.distances()[i] <= radius + METRIC_EPS {
            *class = CellClass::Occupied;
        }
    }
    Ok(out)
}
