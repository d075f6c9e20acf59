//! Ordering viewpoints into a scan tour.
//!
//! An open TSP path over all viewpoints is built on straight-line distances
//! first. Every leg whose endpoints cannot see each other within the sensor
//! range is then replaced by a detour: either a shortest path in the
//! visibility graph, or a shortest path in the relaxed Delaunay roadmap
//! whose over-long edges are split by Steiner viewpoints. The cheaper detour
//! under [`detour_cost`] wins.

mod graph;
pub mod tsp;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridmap::{CellIndex, OccupancyGrid};
use crate::visibility::is_visible;

pub use graph::{build_roadmap, build_visibility_graph, cell_distance, insert_steiner, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Viewpoint,
    Steiner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TourNode {
    pub id: usize,
    pub kind: NodeKind,
    pub cell: CellIndex,
    pub world_xy: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub from: usize,
    pub to: usize,
    /// Straight-line length in meters.
    pub length: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetourSource {
    Visibility,
    Roadmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Waypoint {
    pub cell: CellIndex,
    /// Graph node, or `None` for a Steiner point.
    pub node: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetourPath {
    pub source: DetourSource,
    /// From the infeasible leg's tail to its head, both included.
    pub waypoints: Vec<Waypoint>,
    /// Meters, summed over consecutive waypoints.
    pub length: f64,
    /// Viewpoints the detour would add to the tour.
    pub new_viewpoint_count: usize,
}

/// `(1 - eta) * length + eta * new_viewpoint_count`.
pub fn detour_cost(path: &DetourPath, eta: f64) -> f64 {
    psi(path.length, path.new_viewpoint_count, eta)
}

pub fn psi(length: f64, new_viewpoints: usize, eta: f64) -> f64 {
    (1.0 - eta) * length + eta * new_viewpoints as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetourChoice {
    pub length: f64,
    pub new_viewpoints: usize,
    pub cost: f64,
    pub waypoints: Vec<CellIndex>,
}

/// How one infeasible leg was replaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repair {
    /// Leg position in the tour before finalization.
    pub leg: usize,
    pub tail: usize,
    pub head: usize,
    pub visibility: Option<DetourChoice>,
    pub roadmap: Option<DetourChoice>,
    pub chosen: DetourSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Node table; viewpoint ids come first and match the viewpoint order.
    pub nodes: Vec<TourNode>,
    pub sequence: Vec<usize>,
    pub legs: Vec<Leg>,
    pub total_length: f64,
    /// Steiner nodes in the node table.
    pub added_viewpoints: usize,
    pub closed: bool,
    pub repairs: Vec<Repair>,
}

impl Tour {
    fn from_parts(
        grid: &OccupancyGrid,
        nodes: Vec<TourNode>,
        sequence: Vec<usize>,
        r: f64,
        closed: bool,
    ) -> Self {
        let legs: Vec<Leg> = sequence
            .windows(2)
            .map(|w| {
                let (a, b) = (nodes[w[0]].cell, nodes[w[1]].cell);
                Leg {
                    from: w[0],
                    to: w[1],
                    length: cell_distance(grid, a, b),
                    feasible: is_visible(grid, a, b, r).unwrap_or(false),
                }
            })
            .collect();
        Self {
            total_length: legs.iter().fold(0.0, |acc, l| acc + l.length),
            added_viewpoints: nodes.iter().filter(|n| n.kind == NodeKind::Steiner).count(),
            nodes,
            sequence,
            legs,
            closed,
            repairs: Vec::new(),
        }
    }

    /// Cells in visiting order.
    pub fn cells(&self) -> Vec<CellIndex> {
        self.sequence
            .iter()
            .map(|&id| self.nodes[id].cell)
            .collect()
    }

    pub fn infeasible_legs(&self) -> Vec<usize> {
        self.legs
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.feasible)
            .map(|(k, _)| k)
            .collect()
    }

    /// Distinct nodes visited: viewpoints plus Steiner nodes.
    pub fn unique_node_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        self.sequence
            .iter()
            .filter(|&&id| !std::mem::replace(&mut seen[id], true))
            .count()
    }
}

/// Open nearest-neighbor plus 2-opt tour over `viewpoints` on straight-line
/// distances, starting at `start`. With `close_loop` the tour returns to
/// the start.
pub fn initial_tsp_tour(
    grid: &OccupancyGrid,
    viewpoints: &[CellIndex],
    start: usize,
    r: f64,
    close_loop: bool,
) -> Result<Tour> {
    if viewpoints.is_empty() {
        return Err(Error::EmptySet);
    }
    if start >= viewpoints.len() {
        return Err(Error::InvalidParameter(format!(
            "start node {start} out of range"
        )));
    }
    let dist: Vec<Vec<f64>> = viewpoints
        .iter()
        .map(|&a| {
            viewpoints
                .iter()
                .map(|&b| cell_distance(grid, a, b))
                .collect()
        })
        .collect();
    let mut sequence = tsp::solve(&dist, start);
    let closed = close_loop && viewpoints.len() > 1;
    if closed {
        sequence.push(start);
    }
    let nodes = viewpoints
        .iter()
        .enumerate()
        .map(|(id, &cell)| TourNode {
            id,
            kind: NodeKind::Viewpoint,
            cell,
            world_xy: grid.world_xy(cell),
        })
        .collect();
    Ok(Tour::from_parts(grid, nodes, sequence, r, closed))
}

/// Shortest detour from `tail` to `head` in `graph`. Roadmap edges that are
/// not visible within `r` are split with [`insert_steiner`]; an edge that
/// cannot be split is dropped and the search repeated. `in_tour` tells which
/// cells are already tour nodes and therefore cost nothing to revisit.
pub fn detour(
    grid: &OccupancyGrid,
    graph: &Graph,
    source: DetourSource,
    tail: usize,
    head: usize,
    r: f64,
    in_tour: &dyn Fn(CellIndex) -> bool,
) -> Option<DetourPath> {
    let mut working = graph.clone();
    let mut splits: HashMap<(usize, usize), Vec<CellIndex>> = HashMap::new();
    let path = loop {
        let (path, _) = working.shortest_path(tail, head)?;
        let mut broken = None;
        if source == DetourSource::Roadmap {
            for w in path.windows(2) {
                let key = (w[0].min(w[1]), w[0].max(w[1]));
                if splits.contains_key(&key) {
                    continue;
                }
                let (a, b) = (graph.nodes[key.0], graph.nodes[key.1]);
                match insert_steiner(grid, a, b, r) {
                    Some(interior) => {
                        splits.insert(key, interior);
                    }
                    None => {
                        broken = Some(key);
                        break;
                    }
                }
            }
        }
        match broken {
            Some((a, b)) => working.remove_edge(a, b),
            None => break path,
        }
    };

    let mut waypoints = vec![Waypoint {
        cell: graph.nodes[tail],
        node: Some(tail),
    }];
    for w in path.windows(2) {
        let key = (w[0].min(w[1]), w[0].max(w[1]));
        if let Some(interior) = splits.get(&key) {
            let mut cells = interior.clone();
            if w[0] > w[1] {
                cells.reverse();
            }
            waypoints.extend(cells.into_iter().map(|cell| Waypoint { cell, node: None }));
        }
        waypoints.push(Waypoint {
            cell: graph.nodes[w[1]],
            node: Some(w[1]),
        });
    }
    let length = waypoints.windows(2).fold(0.0, |acc, w| {
        acc + cell_distance(grid, w[0].cell, w[1].cell)
    });
    let mut counted: Vec<CellIndex> = Vec::new();
    for wp in &waypoints[1..waypoints.len() - 1] {
        if !in_tour(wp.cell) && !counted.contains(&wp.cell) {
            counted.push(wp.cell);
        }
    }
    Some(DetourPath {
        source,
        waypoints,
        length,
        new_viewpoint_count: counted.len(),
    })
}

/// Replace every infeasible leg by the cheaper detour (ties keep the
/// visibility-graph detour). Fails when a leg has no detour at all.
pub fn finalize_tour(
    grid: &OccupancyGrid,
    tour: &Tour,
    visibility: &Graph,
    roadmap: &Graph,
    r: f64,
    eta: f64,
) -> Result<Tour> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "eta must be in [0, 1), got {eta}"
        )));
    }
    let mut nodes = tour.nodes.clone();
    let mut by_cell: HashMap<CellIndex, usize> = nodes.iter().map(|n| (n.cell, n.id)).collect();
    let mut sequence = vec![tour.sequence[0]];
    let mut repairs = tour.repairs.clone();
    for (k, leg) in tour.legs.iter().enumerate() {
        if leg.feasible {
            sequence.push(leg.to);
            continue;
        }
        let in_tour = |c: CellIndex| by_cell.contains_key(&c);
        let via_v = detour(
            grid,
            visibility,
            DetourSource::Visibility,
            leg.from,
            leg.to,
            r,
            &in_tour,
        );
        let via_r = detour(
            grid,
            roadmap,
            DetourSource::Roadmap,
            leg.from,
            leg.to,
            r,
            &in_tour,
        );
        let summary = |p: &DetourPath| DetourChoice {
            length: p.length,
            new_viewpoints: p.new_viewpoint_count,
            cost: detour_cost(p, eta),
            waypoints: p.waypoints.iter().map(|w| w.cell).collect(),
        };
        let chosen = match (&via_v, &via_r) {
            (Some(v), Some(rm)) if detour_cost(rm, eta) < detour_cost(v, eta) => rm,
            (Some(v), _) => v,
            (None, Some(rm)) => rm,
            (None, None) => {
                return Err(Error::StrandedTour {
                    tail: nodes[leg.from].cell,
                    head: nodes[leg.to].cell,
                })
            }
        };
        repairs.push(Repair {
            leg: k,
            tail: leg.from,
            head: leg.to,
            visibility: via_v.as_ref().map(summary),
            roadmap: via_r.as_ref().map(summary),
            chosen: chosen.source,
        });
        for wp in &chosen.waypoints[1..] {
            let id = match (wp.node, by_cell.get(&wp.cell)) {
                (Some(id), _) => id,
                (None, Some(&id)) => id,
                (None, None) => {
                    let id = nodes.len();
                    nodes.push(TourNode {
                        id,
                        kind: NodeKind::Steiner,
                        cell: wp.cell,
                        world_xy: grid.world_xy(wp.cell),
                    });
                    by_cell.insert(wp.cell, id);
                    id
                }
            };
            sequence.push(id);
        }
    }
    let mut out = Tour::from_parts(grid, nodes, sequence, r, tour.closed);
    out.repairs = repairs;
    debug_assert!(out.legs.iter().all(|l| l.feasible));
    Ok(out)
}
