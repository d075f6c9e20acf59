//! Seeded desk-scale test worlds.
//!
//! `width` x `height` is the interior; the generated grid adds a one-cell
//! occupied frame, so an empty 50x50 recipe yields a 52x52 grid with 2500
//! free cells. Feature sizes are specified in meters and converted with the
//! recipe resolution. Passages are at least 1 m wide so the default 0.3 m
//! inflation never pinches them shut.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CellClass, CellIndex, OccupancyGrid, Origin, DEFAULT_RESOLUTION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorldKind {
    Empty,
    Corridor,
    Rooms,
    Loop,
    RandomObstacles,
}

impl WorldKind {
    pub const ALL: [WorldKind; 5] = [
        WorldKind::Empty,
        WorldKind::Corridor,
        WorldKind::Rooms,
        WorldKind::Loop,
        WorldKind::RandomObstacles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorldKind::Empty => "empty",
            WorldKind::Corridor => "corridor",
            WorldKind::Rooms => "rooms",
            WorldKind::Loop => "loop",
            WorldKind::RandomObstacles => "random-obstacles",
        }
    }

    fn default_size(self) -> (usize, usize) {
        match self {
            WorldKind::Empty => (50, 50),
            WorldKind::Corridor => (200, 60),
            WorldKind::Rooms => (160, 160),
            WorldKind::Loop => (160, 120),
            WorldKind::RandomObstacles => (120, 120),
        }
    }
}

impl fmt::Display for WorldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WorldKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown world recipe `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldRecipe {
    pub kind: WorldKind,
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub seed: u64,
}

impl WorldRecipe {
    pub fn new(kind: WorldKind, width: usize, height: usize, resolution: f64, seed: u64) -> Self {
        Self {
            kind,
            width,
            height,
            resolution,
            seed,
        }
    }

    /// Parse `name[:WxH][@resolution]`, e.g. `rooms:160x120@0.05`.
    pub fn parse(text: &str, seed: u64) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("malformed recipe `{text}`"));
        let (rest, resolution) = match text.split_once('@') {
            Some((r, res)) => (r, res.parse::<f64>().map_err(|_| bad())?),
            None => (text, DEFAULT_RESOLUTION),
        };
        let (name, size) = match rest.split_once(':') {
            Some((n, s)) => (n, Some(s)),
            None => (rest, None),
        };
        let kind: WorldKind = name.parse()?;
        let (width, height) = match size {
            Some(s) => {
                let (w, h) = s.split_once('x').ok_or_else(bad)?;
                (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?)
            }
            None => kind.default_size(),
        };
        Ok(Self::new(kind, width, height, resolution, seed))
    }

    fn too_small(&self, reason: impl Into<String>) -> Error {
        Error::WorldTooSmall {
            recipe: self.kind.name().to_string(),
            width: self.width,
            height: self.height,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for WorldRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}x{}@{}",
            self.kind, self.width, self.height, self.resolution
        )
    }
}

/// Interior occupancy canvas, `true` = wall.
struct Canvas {
    w: usize,
    h: usize,
    wall: Vec<bool>,
}

impl Canvas {
    fn new(w: usize, h: usize) -> Self {
        Self {
            w,
            h,
            wall: vec![false; w * h],
        }
    }

    /// Fill `[c0, c1) x [r0, r1)`, clipped to the canvas.
    fn fill(&mut self, c0: usize, c1: usize, r0: usize, r1: usize, value: bool) {
        for r in r0.min(self.h)..r1.min(self.h) {
            for c in c0.min(self.w)..c1.min(self.w) {
                self.wall[r * self.w + c] = value;
            }
        }
    }
}

pub fn generate_world(recipe: &WorldRecipe) -> Result<OccupancyGrid> {
    if !(recipe.resolution > 0.0) || !recipe.resolution.is_finite() {
        return Err(Error::NonPositiveResolution(recipe.resolution));
    }
    let cells = |m: f64| ((m / recipe.resolution).round() as usize).max(1);
    let (w, h) = (recipe.width, recipe.height);
    if w < 2 || h < 2 || w < cells(0.5) || h < cells(0.5) {
        return Err(recipe.too_small("interior must be at least 0.5 m and 2 cells each way"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut canvas = Canvas::new(w, h);
    match recipe.kind {
        WorldKind::Empty => {}
        WorldKind::Corridor => corridor(&mut canvas, &cells, &mut rng),
        WorldKind::Rooms => rooms(&mut canvas, &cells, &mut rng),
        WorldKind::Loop => ring(&mut canvas, &cells, &mut rng, recipe)?,
        WorldKind::RandomObstacles => scatter(&mut canvas, &cells, &mut rng, recipe.resolution),
    }

    let (gw, gh) = (w + 2, h + 2);
    let mut grid = OccupancyGrid::filled(gw, gh, recipe.resolution, CellClass::Occupied)?
        .with_origin(Origin::default());
    for r in 0..h {
        for c in 0..w {
            if !canvas.wall[r * w + c] {
                grid.set(CellIndex::new(r + 1, c + 1), CellClass::Free);
            }
        }
    }
    keep_largest_component(&mut grid);
    Ok(grid)
}

fn keep_largest_component(grid: &mut OccupancyGrid) {
    let components = grid.free_components();
    for comp in components.iter().skip(1) {
        for &cell in comp {
            grid.set(cell, CellClass::Occupied);
        }
    }
}

/// Split `[0, len)` into `n` spans separated by walls of thickness `t`,
/// jittering interior boundaries. Returns (start, end) of each span.
fn partition(
    len: usize,
    n: usize,
    t: usize,
    jitter: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let mut spans = Vec::with_capacity(n);
    let mut start = 0;
    for k in 1..=n {
        let end = if k == n {
            len
        } else {
            let base = k * len / n;
            let j = if jitter > 0 {
                rng.gen_range(0..=2 * jitter) as i64 - jitter as i64
            } else {
                0
            };
            (base as i64 + j) as usize
        };
        spans.push((start, end));
        start = end + t;
    }
    spans
}

fn rooms(canvas: &mut Canvas, cells: &dyn Fn(f64) -> usize, rng: &mut ChaCha8Rng) {
    let t = cells(0.1);
    let door = cells(1.0);
    let margin = cells(0.25);
    let min_room = cells(2.2).max(door + 2 * margin);
    let target = 3.5;
    let count = |len: usize| -> usize {
        let n = ((len as f64) / cells(target) as f64).round().max(1.0) as usize;
        let mut n = n;
        while n > 1 && len.saturating_sub((n - 1) * t) / n < min_room {
            n -= 1;
        }
        n
    };
    let (nx, ny) = (count(canvas.w), count(canvas.h));
    if nx * ny <= 1 {
        return;
    }
    let jitter_x = ((canvas.w / nx).saturating_sub(min_room) / 3).min(cells(0.5));
    let jitter_y = ((canvas.h / ny).saturating_sub(min_room) / 3).min(cells(0.5));
    let xs = partition(canvas.w, nx, t, jitter_x, rng);
    let ys = partition(canvas.h, ny, t, jitter_y, rng);

    for &(_, end) in &xs[..nx - 1] {
        canvas.fill(end, end + t, 0, canvas.h, true);
    }
    for &(_, end) in &ys[..ny - 1] {
        canvas.fill(0, canvas.w, end, end + t, true);
    }

    // Random spanning tree over the room lattice, plus some extra doors.
    let id = |i: usize, j: usize| j * nx + i;
    let mut visited = vec![false; nx * ny];
    let mut stack = vec![(rng.gen_range(0..nx), rng.gen_range(0..ny))];
    visited[id(stack[0].0, stack[0].1)] = true;
    let mut doors: Vec<((usize, usize), (usize, usize))> = Vec::new();
    while let Some(&(i, j)) = stack.last() {
        let mut options = Vec::new();
        if i > 0 && !visited[id(i - 1, j)] {
            options.push((i - 1, j));
        }
        if i + 1 < nx && !visited[id(i + 1, j)] {
            options.push((i + 1, j));
        }
        if j > 0 && !visited[id(i, j - 1)] {
            options.push((i, j - 1));
        }
        if j + 1 < ny && !visited[id(i, j + 1)] {
            options.push((i, j + 1));
        }
        if options.is_empty() {
            stack.pop();
            continue;
        }
        let next = options[rng.gen_range(0..options.len())];
        visited[id(next.0, next.1)] = true;
        doors.push(((i, j), next));
        stack.push(next);
    }
    for j in 0..ny {
        for i in 0..nx {
            for (a, b) in [((i, j), (i + 1, j)), ((i, j), (i, j + 1))] {
                if b.0 >= nx || b.1 >= ny {
                    continue;
                }
                let linked = doors
                    .iter()
                    .any(|&(p, q)| (p, q) == (a, b) || (q, p) == (a, b));
                if !linked && rng.gen_bool(0.35) {
                    doors.push((a, b));
                }
            }
        }
    }

    for ((i0, j0), (i1, j1)) in doors {
        let (a, b) = if (i0, j0) <= (i1, j1) {
            ((i0, j0), (i1, j1))
        } else {
            ((i1, j1), (i0, j0))
        };
        if a.1 == b.1 {
            // vertical wall between columns a.0 and b.0, door along rows
            let (r0, r1) = ys[a.1];
            let wall = xs[a.0].1;
            let start = door_start(r0, r1, door, margin, rng);
            canvas.fill(wall, wall + t, start, start + door, false);
        } else {
            let (c0, c1) = xs[a.0];
            let wall = ys[a.1].1;
            let start = door_start(c0, c1, door, margin, rng);
            canvas.fill(start, start + door, wall, wall + t, false);
        }
    }
}

fn door_start(lo: usize, hi: usize, door: usize, margin: usize, rng: &mut ChaCha8Rng) -> usize {
    let first = lo + margin;
    let last = hi.saturating_sub(margin + door);
    if last <= first {
        lo
    } else {
        rng.gen_range(first..=last)
    }
}

fn corridor(canvas: &mut Canvas, cells: &dyn Fn(f64) -> usize, rng: &mut ChaCha8Rng) {
    let horizontal = canvas.w >= canvas.h;
    let (long, short) = if horizontal {
        (canvas.w, canvas.h)
    } else {
        (canvas.h, canvas.w)
    };
    let t = cells(0.1);
    let gap = cells(1.2);
    if short < gap + cells(0.8) {
        return;
    }
    let mut side = rng.gen_bool(0.5);
    let mut pos = 0usize;
    loop {
        let leg = cells(1.6) + rng.gen_range(0..=cells(0.4));
        pos += leg;
        if pos + t + cells(1.2) > long {
            break;
        }
        let (s0, s1) = if side { (0, short - gap) } else { (gap, short) };
        if horizontal {
            canvas.fill(pos, pos + t, s0, s1, true);
        } else {
            canvas.fill(s0, s1, pos, pos + t, true);
        }
        pos += t;
        side = !side;
    }
}

fn ring(
    canvas: &mut Canvas,
    cells: &dyn Fn(f64) -> usize,
    rng: &mut ChaCha8Rng,
    recipe: &WorldRecipe,
) -> Result<()> {
    let lane = cells(1.3) + rng.gen_range(0..=cells(0.3));
    let need = 2 * lane + cells(0.5);
    if canvas.w < need || canvas.h < need {
        return Err(recipe.too_small(format!(
            "a loop needs at least {need} cells per side for its ring corridor"
        )));
    }
    let (w, h) = (canvas.w, canvas.h);
    canvas.fill(lane, w - lane, lane, h - lane, true);
    Ok(())
}

fn scatter(
    canvas: &mut Canvas,
    cells: &dyn Fn(f64) -> usize,
    rng: &mut ChaCha8Rng,
    resolution: f64,
) {
    let clearance = cells(1.0);
    let area_m2 = canvas.w as f64 * canvas.h as f64 * resolution * resolution;
    let target = (area_m2 * 0.12).round() as usize;
    let (lo, hi) = (cells(0.3), cells(1.2));
    let mut placed: Vec<(usize, usize, usize, usize)> = Vec::new();
    for _ in 0..target * 30 {
        if placed.len() >= target {
            break;
        }
        let bw = rng.gen_range(lo..=hi);
        let bh = rng.gen_range(lo..=hi);
        if canvas.w < bw + 2 * clearance || canvas.h < bh + 2 * clearance {
            return;
        }
        let c0 = rng.gen_range(clearance..=canvas.w - bw - clearance);
        let r0 = rng.gen_range(clearance..=canvas.h - bh - clearance);
        let clash = placed.iter().any(|&(pc, pr, pw, ph)| {
            c0 < pc + pw + clearance
                && pc < c0 + bw + clearance
                && r0 < pr + ph + clearance
                && pr < r0 + bh + clearance
        });
        if !clash {
            placed.push((c0, r0, bw, bh));
        }
    }
    for (c0, r0, bw, bh) in placed {
        canvas.fill(c0, c0 + bw, r0, r0 + bh, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_world_has_walled_border() {
        let g = generate_world(&WorldRecipe::new(WorldKind::Empty, 50, 50, 0.1, 0)).unwrap();
        assert_eq!((g.width(), g.height()), (52, 52));
        assert_eq!(g.free_count(), 2500);
        assert_eq!(g.count(CellClass::Occupied), 52 * 4 - 4);
    }

    #[test]
    fn every_recipe_is_connected_and_deterministic() {
        for kind in WorldKind::ALL {
            for seed in 0..4 {
                let (w, h) = kind.default_size();
                let recipe = WorldRecipe::new(kind, w, h, 0.05, seed);
                let a = generate_world(&recipe).unwrap();
                let b = generate_world(&recipe).unwrap();
                assert_eq!(a, b, "{kind} seed {seed}");
                assert_eq!(a.free_components().len(), 1, "{kind} seed {seed}");
            }
        }
    }

    #[test]
    fn corridor_100_by_20() {
        let g = generate_world(&WorldRecipe::new(WorldKind::Corridor, 100, 20, 0.1, 3)).unwrap();
        assert_eq!(g.free_components().len(), 1);
        assert!(g.count(CellClass::Occupied) > 2 * 102 + 2 * 20);
    }

    #[test]
    fn rooms_have_internal_walls() {
        let g = generate_world(&WorldRecipe::new(WorldKind::Rooms, 160, 160, 0.05, 7)).unwrap();
        assert!(g.free_count() < 160 * 160);
        assert_eq!(g.free_components().len(), 1);
    }

    #[test]
    fn too_small_is_an_error() {
        assert!(matches!(
            generate_world(&WorldRecipe::new(WorldKind::Loop, 30, 30, 0.05, 0)),
            Err(Error::WorldTooSmall { .. })
        ));
        assert!(generate_world(&WorldRecipe::new(WorldKind::Empty, 1, 10, 0.05, 0)).is_err());
    }

    #[test]
    fn recipe_strings() {
        let r = WorldRecipe::parse("rooms:80x60@0.1", 9).unwrap();
        assert_eq!(r, WorldRecipe::new(WorldKind::Rooms, 80, 60, 0.1, 9));
        let r = WorldRecipe::parse("random-obstacles", 1).unwrap();
        assert_eq!(
            (r.width, r.height, r.resolution),
            (120, 120, DEFAULT_RESOLUTION)
        );
        assert!(WorldRecipe::parse("castle", 0).is_err());
        assert!(WorldRecipe::parse("rooms:80by60", 0).is_err());
        assert_eq!(r.to_string(), "random-obstacles:120x120@0.05");
    }
}
