//! SVG rendering of a plan.
//!
//! Each cell is `scale` pixels square. Row 0 is drawn at the bottom, so a
//! world point maps to canvas coordinates
//! `px = (x - origin.x) / res * scale`, `py = (height - (y - origin.y) / res) * scale`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::gridmap::{CellClass, CellIndex, OccupancyGrid};
use crate::pipeline::TourArtifact;
use crate::tour::NodeKind;
use crate::visibility::CoverageMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Layer {
    Grid,
    Coverage,
    Path,
    Viewpoints,
    Steiner,
}

impl Layer {
    pub const ALL: [Layer; 5] = [
        Layer::Grid,
        Layer::Coverage,
        Layer::Path,
        Layer::Viewpoints,
        Layer::Steiner,
    ];
}

impl FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "grid" => Layer::Grid,
            "coverage" => Layer::Coverage,
            "path" => Layer::Path,
            "viewpoints" => Layer::Viewpoints,
            "steiner" => Layer::Steiner,
            other => return Err(format!("unknown SVG layer `{other}`")),
        })
    }
}

/// Parse a comma-separated layer list; `all` selects every layer.
pub fn parse_layers(spec: &str) -> Result<BTreeSet<Layer>, String> {
    if spec.trim() == "all" {
        return Ok(Layer::ALL.into_iter().collect());
    }
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Pixels per cell for a grid, keeping the canvas near 800 px.
pub fn default_scale(grid: &OccupancyGrid) -> f64 {
    let side = grid.width().max(grid.height()).max(1) as f64;
    (800.0 / side).clamp(1.0, 40.0).floor()
}

/// Canvas coordinates of a cell center.
pub fn cell_center_px(grid: &OccupancyGrid, cell: CellIndex, scale: f64) -> (f64, f64) {
    (
        (cell.col as f64 + 0.5) * scale,
        (grid.height() as f64 - cell.row as f64 - 0.5) * scale,
    )
}

/// Canvas coordinates of a world point.
pub fn world_to_px(grid: &OccupancyGrid, xy: [f64; 2], scale: f64) -> (f64, f64) {
    let o = grid.origin();
    let res = grid.resolution();
    (
        (xy[0] - o.x) / res * scale,
        (grid.height() as f64 - (xy[1] - o.y) / res) * scale,
    )
}

// Horizontal runs of cells satisfying `pick`, one rect per run.
fn runs(
    out: &mut String,
    grid: &OccupancyGrid,
    scale: f64,
    fill: &str,
    pick: impl Fn(usize) -> bool,
) {
    for row in 0..grid.height() {
        let y = (grid.height() - row - 1) as f64 * scale;
        let mut col = 0;
        while col < grid.width() {
            if !pick(row * grid.width() + col) {
                col += 1;
                continue;
            }
            let start = col;
            while col < grid.width() && pick(row * grid.width() + col) {
                col += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                start as f64 * scale,
                y,
                (col - start) as f64 * scale,
                scale
            );
        }
    }
}

pub fn render_svg(
    grid: &OccupancyGrid,
    tour: &TourArtifact,
    coverage: &CoverageMask,
    layers: &BTreeSet<Layer>,
    scale: f64,
) -> String {
    let (w, h) = (grid.width() as f64 * scale, grid.height() as f64 * scale);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    if layers.contains(&Layer::Grid) {
        out.push_str("<g id=\"grid\">\n");
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white"/>"#
        );
        let cells = grid.cells();
        runs(&mut out, grid, scale, "black", |i| {
            cells[i] == CellClass::Occupied
        });
        runs(&mut out, grid, scale, "gray", |i| {
            cells[i] == CellClass::Unknown
        });
        out.push_str("</g>\n");
    }
    if layers.contains(&Layer::Coverage) {
        out.push_str("<g id=\"coverage\" fill-opacity=\"0.6\">\n");
        runs(&mut out, grid, scale, "yellow", |i| coverage.contains(i));
        out.push_str("</g>\n");
    }
    if layers.contains(&Layer::Path) {
        out.push_str("<g id=\"path\" fill=\"none\" stroke=\"green\">\n");
        for leg in &tour.paths {
            let pts: Vec<String> = leg
                .cells
                .iter()
                .map(|&c| {
                    let (x, y) = cell_center_px(grid, c, scale);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(out, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        out.push_str("</g>\n");
    }
    let dot = (scale * 1.5).max(2.0);
    for (layer, kind, id, style) in [
        (
            Layer::Viewpoints,
            NodeKind::Viewpoint,
            "viewpoints",
            r#"fill="red""#,
        ),
        (
            Layer::Steiner,
            NodeKind::Steiner,
            "steiner",
            r#"fill="yellow" stroke="black""#,
        ),
    ] {
        if !layers.contains(&layer) {
            continue;
        }
        let _ = writeln!(out, "<g id=\"{id}\">");
        for node in tour.tour.nodes.iter().filter(|n| n.kind == kind) {
            let (x, y) = world_to_px(grid, node.world_xy, scale);
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{dot:.2}" {style}/>"#
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_parsing() {
        assert_eq!(parse_layers("all").unwrap().len(), 5);
        let l = parse_layers("grid,viewpoints").unwrap();
        assert!(l.contains(&Layer::Grid) && l.contains(&Layer::Viewpoints) && l.len() == 2);
        assert!(parse_layers("grid,bogus").is_err());
    }

    #[test]
    fn world_and_cell_transforms_agree() {
        let g = OccupancyGrid::filled(10, 6, 0.05, CellClass::Free).unwrap();
        let c = CellIndex::new(2, 7);
        let (a, b) = (
            cell_center_px(&g, c, 4.0),
            world_to_px(&g, g.world_xy(c), 4.0),
        );
        assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        assert_eq!(a, (30.0, 14.0));
    }
}
