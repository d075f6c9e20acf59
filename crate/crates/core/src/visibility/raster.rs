//! Supercover rasterization of center-to-center segments.
//!
//! A cell is on the supercover of a segment when its closed square meets the
//! closed segment. Where the segment passes exactly through a lattice corner
//! both side cells are included, so visibility never slips diagonally between
//! two blocked cells.

/// Walk the supercover of the segment from the center of cell (0, 0) to the
/// center of cell (`dr`, `dc`), in order from the start. `visit` returns
/// `false` to stop early; the walk reports whether it ran to completion.
pub fn walk_supercover(dr: i64, dc: i64, mut visit: impl FnMut(i64, i64) -> bool) -> bool {
    let (nx, ny) = (dc.abs(), dr.abs());
    let (sx, sy) = (dc.signum(), dr.signum());
    let (mut x, mut y) = (0i64, 0i64);
    if !visit(0, 0) {
        return false;
    }
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < nx || iy < ny {
        // Compare parameters of the next vertical crossing (ix + 1/2) / nx
        // and the next horizontal crossing (iy + 1/2) / ny.
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            if !visit(y, x + sx) || !visit(y + sy, x) {
                return false;
            }
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        if !visit(y, x) {
            return false;
        }
    }
    true
}

/// Supercover cells as (row, col) offsets from the start.
pub fn supercover(dr: i64, dc: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity((dr.abs() + dc.abs() + 1) as usize);
    walk_supercover(dr, dc, |r, c| {
        out.push((r, c));
        true
    });
    out
}
