//! Fast exact visible-set enumeration.
//!
//! The supercover of the segment from a source to a target depends only on
//! the offset between them, which both backends exploit:
//!
//! - [`ShadowTable`]: for every offset `q`, a bitset of the in-range targets
//!   whose ray passes through `q`. The first blocked cell on any ray from a
//!   free source is 4-adjacent to a free cell, so the invisible targets are
//!   exactly the union of the shadows of the *frontier* obstacle cells in
//!   range. Word-parallel and the default.
//! - [`RayTrie`]: all rays merged into one prefix trie; a depth-first walk
//!   prunes the subtree below the first blocked cell. Used when the shadow
//!   table would be too large (very long ranges).
//!
//! Both are identical to testing every target with [`super::is_visible`].

use std::collections::HashMap;

use super::raster::walk_supercover;
use super::within_range;
use crate::gridmap::{CellIndex, OccupancyGrid};

/// Ray trie for one (sensor range, resolution) pair.
#[derive(Debug, Clone)]
pub struct RayTrie {
    radius: i64,
    offsets: Vec<(i32, i32)>,
    child_start: Vec<u32>,
    terminal: Vec<bool>,
}

impl RayTrie {
    pub fn new(range: f64, resolution: f64) -> Self {
        let radius = (range / resolution + 1e-6).floor().max(0.0) as i64;

        // Build as a hash trie first, then flatten breadth-first so every
        // node's children are contiguous.
        let mut children: HashMap<(u32, i32, i32), u32> = HashMap::new();
        let mut node_offset: Vec<(i32, i32)> = vec![(0, 0)];
        let mut node_terminal = vec![false];
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                if !within_range(dr * dr + dc * dc, resolution, range) {
                    continue;
                }
                let mut node = 0u32;
                walk_supercover(dr, dc, |r, c| {
                    if (r, c) == (0, 0) {
                        return true;
                    }
                    let key = (node, r as i32, c as i32);
                    node = *children.entry(key).or_insert_with(|| {
                        node_offset.push((r as i32, c as i32));
                        node_terminal.push(false);
                        (node_offset.len() - 1) as u32
                    });
                    true
                });
                node_terminal[node as usize] = true;
            }
        }

        let mut kids: Vec<Vec<u32>> = vec![Vec::new(); node_offset.len()];
        let mut entries: Vec<_> = children.into_iter().collect();
        entries.sort_unstable();
        for ((parent, _, _), child) in entries {
            kids[parent as usize].push(child);
        }

        let mut order = vec![0u32];
        let mut head = 0;
        while head < order.len() {
            let n = order[head] as usize;
            order.extend_from_slice(&kids[n]);
            head += 1;
        }
        let mut rank = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old as usize] = new as u32;
        }
        let mut offsets = Vec::with_capacity(order.len());
        let mut terminal = Vec::with_capacity(order.len());
        let mut child_start = Vec::with_capacity(order.len() + 1);
        let mut next_child = 1u32;
        for &old in &order {
            offsets.push(node_offset[old as usize]);
            terminal.push(node_terminal[old as usize]);
            child_start.push(next_child);
            debug_assert!(kids[old as usize]
                .iter()
                .enumerate()
                .all(|(k, &c)| rank[c as usize] == next_child + k as u32));
            next_child += kids[old as usize].len() as u32;
        }
        child_start.push(next_child);

        Self {
            radius,
            offsets,
            child_start,
            terminal,
        }
    }

    /// Largest offset magnitude along either axis.
    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn target_count(&self) -> usize {
        self.terminal.iter().filter(|&&t| t).count()
    }
}

/// Per-offset shadows: bit `t` of `shadow(q)` is set when the ray to target
/// `t` passes through offset `q`.
#[derive(Debug, Clone)]
pub struct ShadowTable {
    radius: i64,
    targets: Vec<(i32, i32)>,
    words: usize,
    // slot per offset in the (2R+1)^2 box, u32::MAX when no ray crosses it
    slot: Vec<u32>,
    bits: Vec<u64>,
    all: Vec<u64>,
}

impl ShadowTable {
    /// Bytes the table for this range and resolution would occupy.
    pub fn estimated_bytes(range: f64, resolution: f64) -> usize {
        let radius = (range / resolution + 1e-6).floor().max(0.0);
        let disk = std::f64::consts::PI * (radius + 1.0) * (radius + 1.0);
        (disk * (disk / 64.0 + 1.0) * 8.0) as usize
    }

    pub fn new(range: f64, resolution: f64) -> Self {
        let radius = (range / resolution + 1e-6).floor().max(0.0) as i64;
        let mut targets = Vec::new();
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                if within_range(dr * dr + dc * dc, resolution, range) {
                    targets.push((dr as i32, dc as i32));
                }
            }
        }
        let words = targets.len().div_ceil(64);
        let side = (2 * radius + 1) as usize;
        let mut slot = vec![u32::MAX; side * side];
        let mut bits: Vec<u64> = Vec::new();
        for (t, &(dr, dc)) in targets.iter().enumerate() {
            walk_supercover(dr as i64, dc as i64, |r, c| {
                let k = ((r + radius) as usize) * side + (c + radius) as usize;
                if slot[k] == u32::MAX {
                    slot[k] = (bits.len() / words) as u32;
                    bits.resize(bits.len() + words, 0);
                }
                bits[slot[k] as usize * words + t / 64] |= 1u64 << (t % 64);
                true
            });
        }
        let mut all = vec![!0u64; words];
        if targets.len() % 64 != 0 {
            all[words - 1] = (1u64 << (targets.len() % 64)) - 1;
        }
        Self {
            radius,
            targets,
            words,
            slot,
            bits,
            all,
        }
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    fn shadow(&self, dr: i64, dc: i64) -> Option<&[u64]> {
        let side = 2 * self.radius + 1;
        if dr.abs() > self.radius || dc.abs() > self.radius {
            return None;
        }
        let s = self.slot[((dr + self.radius) * side + dc + self.radius) as usize];
        (s != u32::MAX).then(|| &self.bits[s as usize * self.words..(s as usize + 1) * self.words])
    }
}

/// Shadow tables above this size fall back to the ray trie.
pub const SHADOW_TABLE_BUDGET_BYTES: usize = 256 << 20;

#[derive(Debug, Clone)]
enum Backend {
    Shadow {
        table: ShadowTable,
        // non-free cells (off-grid included) 4-adjacent to a free cell,
        // per row from -1 to height, sorted columns from -1 to width
        frontier: Vec<Vec<i32>>,
    },
    Trie {
        trie: RayTrie,
        pad: usize,
        stride: usize,
        // 1 = free, padded by `pad` blocked cells on every side
        open: Vec<u8>,
        padded_delta: Vec<isize>,
        grid_delta: Vec<isize>,
    },
}

/// A grid prepared for repeated visible-set queries at one sensor range.
#[derive(Debug, Clone)]
pub struct VisibilityContext<'g> {
    grid: &'g OccupancyGrid,
    range: f64,
    backend: Backend,
}

impl<'g> VisibilityContext<'g> {
    pub fn new(grid: &'g OccupancyGrid, range: f64) -> Self {
        if ShadowTable::estimated_bytes(range, grid.resolution()) <= SHADOW_TABLE_BUDGET_BYTES {
            Self::with_shadows(grid, range)
        } else {
            Self::with_trie(grid, range)
        }
    }

    pub fn with_shadows(grid: &'g OccupancyGrid, range: f64) -> Self {
        let table = ShadowTable::new(range, grid.resolution());
        let (w, h) = (grid.width() as i64, grid.height() as i64);
        let mut frontier = vec![Vec::new(); grid.height() + 2];
        for r in -1..=h {
            for c in -1..=w {
                if grid.is_free_signed(r, c) {
                    continue;
                }
                let touches_free = grid.is_free_signed(r, c - 1)
                    || grid.is_free_signed(r, c + 1)
                    || grid.is_free_signed(r - 1, c)
                    || grid.is_free_signed(r + 1, c);
                if touches_free {
                    frontier[(r + 1) as usize].push(c as i32);
                }
            }
        }
        Self {
            grid,
            range,
            backend: Backend::Shadow { table, frontier },
        }
    }

    pub fn with_trie(grid: &'g OccupancyGrid, range: f64) -> Self {
        let trie = RayTrie::new(range, grid.resolution());
        let pad = trie.radius as usize + 1;
        let stride = grid.width() + 2 * pad;
        let mut open = vec![0u8; stride * (grid.height() + 2 * pad)];
        for (i, class) in grid.cells().iter().enumerate() {
            if class.is_free() {
                let cell = grid.cell_at(i);
                open[(cell.row + pad) * stride + cell.col + pad] = 1;
            }
        }
        let padded_delta = trie
            .offsets
            .iter()
            .map(|&(r, c)| r as isize * stride as isize + c as isize)
            .collect();
        let grid_delta = trie
            .offsets
            .iter()
            .map(|&(r, c)| r as isize * grid.width() as isize + c as isize)
            .collect();
        Self {
            grid,
            range,
            backend: Backend::Trie {
                trie,
                pad,
                stride,
                open,
                padded_delta,
                grid_delta,
            },
        }
    }

    pub fn grid(&self) -> &'g OccupancyGrid {
        self.grid
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn uses_shadow_table(&self) -> bool {
        matches!(self.backend, Backend::Shadow { .. })
    }

    // Bitset over shadow-table targets of those visible from `source`.
    fn shadow_mask(table: &ShadowTable, frontier: &[Vec<i32>], src: CellIndex) -> Vec<u64> {
        let mut mask = table.all.clone();
        let (sr, sc) = (src.row as i64, src.col as i64);
        let rad = table.radius;
        let lo_row = (sr - rad).max(-1);
        let hi_row = (sr + rad).min(frontier.len() as i64 - 2);
        for r in lo_row..=hi_row {
            let row = &frontier[(r + 1) as usize];
            let first = row.partition_point(|&c| (c as i64) < sc - rad);
            for &c in &row[first..] {
                let dc = c as i64 - sc;
                if dc > rad {
                    break;
                }
                if let Some(shadow) = table.shadow(r - sr, dc) {
                    for (m, s) in mask.iter_mut().zip(shadow) {
                        *m &= !s;
                    }
                }
            }
        }
        mask
    }

    /// Call `emit` with the grid index of every cell visible from the free
    /// cell at grid index `source` (the source included), in no particular
    /// order.
    pub fn for_each_visible(&self, source: usize, mut emit: impl FnMut(usize)) {
        debug_assert!(self.grid.cells()[source].is_free());
        let cell = self.grid.cell_at(source);
        match &self.backend {
            Backend::Shadow { table, frontier } => {
                let mask = Self::shadow_mask(table, frontier, cell);
                let w = self.grid.width() as isize;
                for (k, &word) in mask.iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let t = k * 64 + bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let (dr, dc) = table.targets[t];
                        emit((source as isize + dr as isize * w + dc as isize) as usize);
                    }
                }
            }
            Backend::Trie {
                trie,
                pad,
                stride,
                open,
                padded_delta,
                grid_delta,
            } => {
                let base = ((cell.row + pad) * stride + cell.col + pad) as isize;
                let gbase = source as isize;
                let mut stack: Vec<u32> = Vec::with_capacity(256);
                stack.push(0);
                while let Some(n) = stack.pop() {
                    let n = n as usize;
                    if open[(base + padded_delta[n]) as usize] == 0 {
                        continue;
                    }
                    if trie.terminal[n] {
                        emit((gbase + grid_delta[n]) as usize);
                    }
                    stack.extend(trie.child_start[n]..trie.child_start[n + 1]);
                }
            }
        }
    }

    pub fn visible_count(&self, source: usize) -> usize {
        match &self.backend {
            Backend::Shadow { table, frontier } => {
                let mask = Self::shadow_mask(table, frontier, self.grid.cell_at(source));
                mask.iter().map(|w| w.count_ones() as usize).sum()
            }
            Backend::Trie { .. } => {
                let mut n = 0;
                self.for_each_visible(source, |_| n += 1);
                n
            }
        }
    }

    /// Visible cells as a sorted list of grid indices.
    pub fn visible_indices(&self, source: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_visible(source, |i| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn visible_cells(&self, source: CellIndex) -> Vec<CellIndex> {
        self.visible_indices(self.grid.index(source))
            .into_iter()
            .map(|i| self.grid.cell_at(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::CellClass;

    #[test]
    fn trie_has_one_terminal_per_in_range_offset() {
        let trie = RayTrie::new(0.5, 0.1);
        // lattice points with dr^2 + dc^2 <= 25
        let expected = (-5i64..=5)
            .flat_map(|r| (-5i64..=5).map(move |c| (r, c)))
            .filter(|(r, c)| r * r + c * c <= 25)
            .count();
        assert_eq!(trie.target_count(), expected);
        assert_eq!(trie.radius(), 5);
    }

    #[test]
    fn open_room_sees_disk() {
        let g = OccupancyGrid::filled(21, 21, 0.1, CellClass::Free).unwrap();
        let ctx = VisibilityContext::new(&g, 0.5);
        let src = g.index(CellIndex::new(10, 10));
        assert_eq!(ctx.visible_count(src), 81);
    }

    #[test]
    fn wall_blocks_far_side() {
        let g = OccupancyGrid::from_ascii(&["..#..", "..#..", "..#.."], 1.0).unwrap();
        let ctx = VisibilityContext::new(&g, 10.0);
        let seen = ctx.visible_cells(CellIndex::new(1, 0));
        assert_eq!(seen.len(), 6);
        assert!(seen.iter().all(|c| c.col < 2));
    }

    #[test]
    fn backends_agree_on_cluttered_map() {
        let g = OccupancyGrid::from_ascii(
            &[
                "..........#.....",
                "...##.....#.....",
                "...##...........",
                "......#.....##..",
                "#.....#.........",
                "..........?.....",
                ".....###........",
                "................",
            ],
            0.1,
        )
        .unwrap();
        for r in [0.0, 0.25, 0.7, 3.0] {
            let a = VisibilityContext::with_shadows(&g, r);
            let b = VisibilityContext::with_trie(&g, r);
            for i in g.free_cells() {
                let idx = g.index(i);
                assert_eq!(
                    a.visible_indices(idx),
                    b.visible_indices(idx),
                    "r={r} {i:?}"
                );
                assert_eq!(a.visible_count(idx), b.visible_count(idx));
            }
        }
    }
}
