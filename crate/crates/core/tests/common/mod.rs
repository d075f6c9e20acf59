//! Independent oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls the planner's own geometry code, so each oracle can
//! disagree with the implementation it checks.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scanplan::gridmap::{CellClass, CellIndex, OccupancyGrid};

pub const EPS: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random grid with each cell occupied with probability `density`.
pub fn random_grid(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    resolution: f64,
    density: f64,
) -> OccupancyGrid {
    let mut g = OccupancyGrid::filled(width, height, resolution, CellClass::Free).unwrap();
    for row in 0..height {
        for col in 0..width {
            if rng.gen_bool(density) {
                g.set(CellIndex::new(row, col), CellClass::Occupied);
            }
        }
    }
    g
}

/// Free grid holding one to five axis-aligned occupied rectangles, each side 1..=6 cells.
pub fn block_grid(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    resolution: f64,
) -> OccupancyGrid {
    let mut g = OccupancyGrid::filled(width, height, resolution, CellClass::Free).unwrap();
    for _ in 0..rng.gen_range(1..=5) {
        let (bw, bh) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let (c0, r0) = (rng.gen_range(0..width), rng.gen_range(0..height));
        for row in r0..(r0 + bh).min(height) {
            for col in c0..(c0 + bw).min(width) {
                g.set(CellIndex::new(row, col), CellClass::Occupied);
            }
        }
    }
    g
}

pub fn free_cells(grid: &OccupancyGrid) -> Vec<CellIndex> {
    grid.free_cells().collect()
}

/// Free cells 4-connected to `seed`, by flood fill.
pub fn component_of(grid: &OccupancyGrid, seed: CellIndex) -> Vec<CellIndex> {
    let mut seen = vec![false; grid.len()];
    let mut stack = vec![seed];
    seen[grid.index(seed)] = true;
    let mut out = Vec::new();
    while let Some(c) = stack.pop() {
        out.push(c);
        let (r, k) = (c.row as i64, c.col as i64);
        for (dr, dc) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
            let (nr, nc) = (r + dr, k + dc);
            if nr < 0 || nc < 0 || nr >= grid.height() as i64 || nc >= grid.width() as i64 {
                continue;
            }
            let n = CellIndex::new(nr as usize, nc as usize);
            if grid.is_free(n) && !seen[grid.index(n)] {
                seen[grid.index(n)] = true;
                stack.push(n);
            }
        }
    }
    out.sort();
    out
}

/// Closed segment between cell centers against the closed square of cell
/// (row, col), in doubled integer coordinates.
fn segment_meets_cell(a: CellIndex, b: CellIndex, row: i64, col: i64) -> bool {
    let (ax, ay) = (2 * a.col as i64 + 1, 2 * a.row as i64 + 1);
    let (bx, by) = (2 * b.col as i64 + 1, 2 * b.row as i64 + 1);
    let (x0, x1, y0, y1) = (2 * col, 2 * col + 2, 2 * row, 2 * row + 2);
    if ax.max(bx) < x0 || ax.min(bx) > x1 || ay.max(by) < y0 || ay.min(by) > y1 {
        return false;
    }
    let side = |x: i64, y: i64| (bx - ax) * (y - ay) - (by - ay) * (x - ax);
    let s = [side(x0, y0), side(x0, y1), side(x1, y0), side(x1, y1)];
    s.iter().any(|&v| v <= 0) && s.iter().any(|&v| v >= 0)
}

/// Line of sight by testing the segment against every blocking cell.
pub fn brute_visible(grid: &OccupancyGrid, a: CellIndex, b: CellIndex, r: f64) -> bool {
    if !grid.is_free(a) || !grid.is_free(b) {
        return false;
    }
    let (dr, dc) = (a.row as f64 - b.row as f64, a.col as f64 - b.col as f64);
    if dr.hypot(dc) * grid.resolution() > r + EPS {
        return false;
    }
    // Cells outside the bounding box of the two cells cannot meet the segment.
    for row in a.row.min(b.row)..=a.row.max(b.row) {
        for col in a.col.min(b.col)..=a.col.max(b.col) {
            let c = CellIndex::new(row, col);
            if !grid.is_free(c) && segment_meets_cell(a, b, row as i64, col as i64) {
                return false;
            }
        }
    }
    true
}

/// Visible set of `source` by brute force, sorted.
pub fn brute_visible_set(grid: &OccupancyGrid, source: CellIndex, r: f64) -> Vec<CellIndex> {
    free_cells(grid)
        .into_iter()
        .filter(|&c| brute_visible(grid, source, c, r))
        .collect()
}

/// Shortest 8-connected path as (orthogonal, diagonal) step counts, with
/// diagonals refused only when both orthogonal neighbors are blocked.
pub fn dijkstra_steps(
    grid: &OccupancyGrid,
    from: CellIndex,
    to: CellIndex,
) -> Option<(usize, usize)> {
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let free = |r: i64, c: i64| {
        r >= 0 && c >= 0 && r < h && c < w && grid.is_free(CellIndex::new(r as usize, c as usize))
    };
    let cost = |s: (usize, usize)| s.0 as f64 + s.1 as f64 * std::f64::consts::SQRT_2;
    let mut best: Vec<Option<(usize, usize)>> = vec![None; grid.len()];
    let mut heap = BinaryHeap::new();
    best[grid.index(from)] = Some((0, 0));
    heap.push(Reverse((OrdF(0.0), grid.index(from))));
    while let Some(Reverse((OrdF(d), i))) = heap.pop() {
        let steps = best[i].unwrap();
        if d > cost(steps) + EPS {
            continue;
        }
        let c = grid.cell_at(i);
        if c == to {
            return Some(steps);
        }
        let (r, k) = (c.row as i64, c.col as i64);
        for dr in -1..=1i64 {
            for dc in -1..=1i64 {
                if (dr, dc) == (0, 0) || !free(r + dr, k + dc) {
                    continue;
                }
                let diagonal = dr != 0 && dc != 0;
                if diagonal && !free(r + dr, k) && !free(r, k + dc) {
                    continue;
                }
                let next = if diagonal {
                    (steps.0, steps.1 + 1)
                } else {
                    (steps.0 + 1, steps.1)
                };
                let j = grid.index(CellIndex::new((r + dr) as usize, (k + dc) as usize));
                if best[j].is_none_or(|b| cost(next) < cost(b) - EPS) {
                    best[j] = Some(next);
                    heap.push(Reverse((OrdF(cost(next)), j)));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy)]
pub struct OrdF(pub f64);
impl PartialEq for OrdF {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for OrdF {}
impl PartialOrd for OrdF {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

type Bits = Vec<u64>;

fn bits_of(n: usize, members: impl IntoIterator<Item = usize>) -> Bits {
    let mut b = vec![0u64; n.div_ceil(64)];
    for m in members {
        b[m / 64] |= 1 << (m % 64);
    }
    b
}

fn subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn meets(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn ones(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(w, &word)| {
        (0..64)
            .filter(move |k| word >> k & 1 == 1)
            .map(move |k| w * 64 + k)
    })
}

/// Minimum number of sets covering `universe`, by branch and bound.
///
/// Dominated sets and dominated elements are removed first; a set of
/// elements with pairwise disjoint covering families gives the lower bound.
pub fn exact_set_cover(universe: usize, sets: &[Vec<usize>]) -> usize {
    let mut family: Vec<Bits> = sets
        .iter()
        .map(|s| bits_of(universe, s.iter().copied()))
        .collect();
    family.sort();
    family.dedup();
    let keep: Vec<bool> = (0..family.len())
        .map(|i| !(0..family.len()).any(|j| j != i && subset(&family[i], &family[j])))
        .collect();
    let family: Vec<Bits> = family
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(s, _)| s)
        .collect();

    let covering: Vec<Bits> = (0..universe)
        .map(|e| {
            bits_of(
                family.len(),
                (0..family.len()).filter(|&s| family[s][e / 64] >> (e % 64) & 1 == 1),
            )
        })
        .collect();
    assert!(
        covering.iter().all(|c| c.iter().any(|&w| w != 0)),
        "universe not coverable"
    );
    // An element whose covering family contains another's is covered for free.
    let mut needed: Vec<usize> = Vec::new();
    for e in 0..universe {
        let dominated = (0..universe).any(|f| {
            f != e && subset(&covering[f], &covering[e]) && (covering[f] != covering[e] || f < e)
        });
        if !dominated {
            needed.push(e);
        }
    }
    let mut state = Search {
        family: &family,
        covering: &covering,
        needed: &needed,
        covered: vec![0u32; universe],
        best: needed.len(),
    };
    state.run(0);
    state.best
}

struct Search<'a> {
    family: &'a [Bits],
    covering: &'a [Bits],
    needed: &'a [usize],
    covered: Vec<u32>,
    best: usize,
}

impl Search<'_> {
    fn lower_bound(&self, open: &[usize]) -> usize {
        let mut used = vec![0u64; self.family.len().div_ceil(64)];
        let mut lb = 0;
        for &e in open {
            if !meets(&used, &self.covering[e]) {
                lb += 1;
                used.iter_mut()
                    .zip(&self.covering[e])
                    .for_each(|(u, c)| *u |= c);
            }
        }
        lb
    }

    fn run(&mut self, used: usize) {
        let mut open: Vec<usize> = self
            .needed
            .iter()
            .copied()
            .filter(|&e| self.covered[e] == 0)
            .collect();
        if open.is_empty() {
            self.best = self.best.min(used);
            return;
        }
        open.sort_by_key(|&e| self.covering[e].iter().map(|w| w.count_ones()).sum::<u32>());
        if used + self.lower_bound(&open) >= self.best {
            return;
        }
        let pivot = open[0];
        let choices: Vec<usize> = ones(&self.covering[pivot]).collect();
        for s in choices {
            let members: Vec<usize> = ones(&self.family[s]).collect();
            members.iter().for_each(|&e| self.covered[e] += 1);
            self.run(used + 1);
            members.iter().for_each(|&e| self.covered[e] -= 1);
        }
    }
}

/// Harmonic number H(n).
pub fn harmonic(n: usize) -> f64 {
    (1..=n).fold(0.0, |acc, k| acc + 1.0 / k as f64)
}

/// Shortest open path from `start` through all nodes, over all permutations.
pub fn permutation_tsp(dist: &[Vec<f64>], start: usize) -> f64 {
    let mut rest: Vec<usize> = (0..dist.len()).filter(|&i| i != start).collect();
    let mut best = f64::INFINITY;
    permute(&mut rest, 0, &mut |order| {
        let mut len = 0.0;
        let mut at = start;
        for &next in order.iter() {
            len += dist[at][next];
            at = next;
        }
        best = best.min(len);
    });
    if rest.is_empty() {
        0.0
    } else {
        best
    }
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Cheapest simple path between two nodes of an undirected weighted graph,
/// by enumerating every simple path.
pub fn brute_shortest_path(
    n: usize,
    edges: &[(usize, usize, f64)],
    from: usize,
    to: usize,
) -> Option<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let mut on_path = vec![false; n];
    let mut best: Option<f64> = None;
    fn dfs(
        adj: &[Vec<(usize, f64)>],
        at: usize,
        to: usize,
        len: f64,
        on: &mut [bool],
        best: &mut Option<f64>,
    ) {
        if at == to {
            *best = Some(best.map_or(len, |b: f64| b.min(len)));
            return;
        }
        on[at] = true;
        for &(next, w) in &adj[at] {
            if !on[next] {
                dfs(adj, next, to, len + w, on, best);
            }
        }
        on[at] = false;
    }
    dfs(&adj, from, to, 0.0, &mut on_path, &mut best);
    best
}

/// Free cells within `radius` meters of a blocking cell center, by checking
/// every pair.
pub fn brute_inflate(grid: &OccupancyGrid, radius: f64) -> OccupancyGrid {
    let blocked: Vec<CellIndex> = (0..grid.len())
        .map(|i| grid.cell_at(i))
        .filter(|&c| !grid.is_free(c))
        .collect();
    let mut out = grid.clone();
    for c in free_cells(grid) {
        let near = blocked.iter().any(|&b| {
            let (dr, dc) = (b.row as f64 - c.row as f64, b.col as f64 - c.col as f64);
            dr.hypot(dc) * grid.resolution() <= radius + EPS
        });
        if near {
            out.set(c, CellClass::Occupied);
        }
    }
    out
}

/// Layout with eight viewpoints around a U-shaped obstacle that opens
/// upward. x1 sits outside the left arm and x2 inside it, so the x1 to x2
/// edge is blocked. Inside the U, x2 to x6 form a pentagon whose sides are
/// within `r` and whose other chords are longer than `r`. The x6 to x2 side
/// is missing, being longer than `r`, but it is clear and within the relaxed
/// range. x7 and x8 sit outside the left arm.
pub struct ULayout {
    pub grid: OccupancyGrid,
    /// x1..x8 in order; node id k is x_{k+1}.
    pub viewpoints: Vec<CellIndex>,
    pub r: f64,
    pub r_relaxed: f64,
}

pub fn u_layout_fixture() -> ULayout {
    let mut grid = OccupancyGrid::filled(38, 32, 1.0, CellClass::Free).unwrap();
    let mut block = |rows: std::ops::RangeInclusive<usize>,
                     cols: std::ops::RangeInclusive<usize>| {
        for row in rows {
            for col in cols.clone() {
                grid.set(CellIndex::new(row, col), CellClass::Occupied);
            }
        }
    };
    block(2..=17, 7..=7);
    block(2..=2, 7..=35);
    block(2..=17, 35..=35);
    let viewpoints = [
        (4, 4),
        (4, 10),
        (4, 23),
        (13, 32),
        (22, 23),
        (22, 10),
        (16, 4),
        (28, 2),
    ]
    .iter()
    .map(|&(r, c)| CellIndex::new(r, c))
    .collect();
    ULayout {
        grid,
        viewpoints,
        r: 14.0,
        r_relaxed: 21.0,
    }
}
