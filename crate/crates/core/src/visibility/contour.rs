//! Boundary cells of a cell set, ordered by Moore-neighbor tracing.

use std::collections::BTreeSet;

use crate::gridmap::CellIndex;

// Clockwise with row growing upward: W, NW, N, NE, E, SE, S, SW.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// True when `cell` is a member with at least one 4-neighbor outside the
/// set (off-grid counts as outside).
pub fn is_boundary(member: &dyn Fn(i64, i64) -> bool, cell: CellIndex) -> bool {
    let (r, c) = (cell.row as i64, cell.col as i64);
    member(r, c)
        && (!member(r, c - 1) || !member(r - 1, c) || !member(r, c + 1) || !member(r + 1, c))
}

/// Boundary cells of the set described by `member`, given its members in
/// any order. Tracing starts at the smallest remaining boundary cell (row
/// major), walks clockwise, and restarts on whatever boundary cells the
/// previous traces did not reach (inner boundaries).
pub fn trace(
    member: &dyn Fn(i64, i64) -> bool,
    members: impl Iterator<Item = CellIndex>,
) -> Vec<CellIndex> {
    let mut remaining: BTreeSet<CellIndex> = members.filter(|&c| is_boundary(member, c)).collect();
    let mut out = Vec::with_capacity(remaining.len());
    let budget = 8 * remaining.len() + 16;
    while let Some(&start) = remaining.iter().next() {
        remaining.remove(&start);
        out.push(start);
        let (sr, sc) = (start.row as i64, start.col as i64);
        let Some(first_back) = [0usize, 6, 4, 2]
            .into_iter()
            .find(|&d| !member(sr + RING[d].0, sc + RING[d].1))
        else {
            continue;
        };
        let (mut r, mut c, mut back) = (sr, sc, first_back);
        for _ in 0..budget {
            let mut next = None;
            for k in 1..=8 {
                let d = (back + k) % 8;
                let (nr, nc) = (r + RING[d].0, c + RING[d].1);
                if member(nr, nc) {
                    next = Some((nr, nc, (back + k - 1) % 8));
                    break;
                }
            }
            let Some((nr, nc, prev_dir)) = next else {
                break;
            };
            // Direction from the new cell back to the last outside cell
            // examined before it.
            let (br, bc) = (r + RING[prev_dir].0, c + RING[prev_dir].1);
            back = direction(br - nr, bc - nc);
            r = nr;
            c = nc;
            if (r, c) == (sr, sc) && back == first_back {
                break;
            }
            let cell = CellIndex::new(r as usize, c as usize);
            if remaining.remove(&cell) {
                out.push(cell);
            }
        }
    }
    out
}

fn direction(dr: i64, dc: i64) -> usize {
    RING.iter()
        .position(|&d| d == (dr, dc))
        .expect("backtrack cell is a Moore neighbor")
}
