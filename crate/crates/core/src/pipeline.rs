//! End-to-end planning runs and the JSON artifacts they produce.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline_bcd::bcd_plan;
use crate::config::PlanConfig;
use crate::coverage::{
    coverage_of, greedy_cover_with, CoverOptions, UnreachableComponent, ViewpointSet,
};
use crate::error::Error;
use crate::gridmap::{inflate, CellIndex, OccupancyGrid};
use crate::pathplan::{leg_paths, GridPath};
use crate::tour::{
    build_roadmap, build_visibility_graph, finalize_tour, initial_tsp_tour, DetourSource, Tour,
};
use crate::visibility::{coverage_fraction, CoverageMask};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Inflate,
    Cover,
    Graph,
    Tsp,
    Repair,
    Path,
    Baseline,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Inflate => "inflate",
            Stage::Cover => "cover",
            Stage::Graph => "graph",
            Stage::Tsp => "tsp",
            Stage::Repair => "repair",
            Stage::Path => "path",
            Stage::Baseline => "baseline",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

fn at(stage: Stage) -> impl Fn(Error) -> StageError {
    move |error| StageError { stage, error }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub universe: f64,
    pub greedy: f64,
    pub graph: f64,
    pub tsp: f64,
    pub repair: f64,
    pub path: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetourChoices {
    pub visibility: usize,
    pub roadmap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub planner: String,
    pub free_cells: usize,
    pub covered_cells: usize,
    pub reachable_cells: usize,
    pub coverage_percent: f64,
    /// Viewpoints plus Steiner nodes, counted once each.
    pub viewpoint_count: usize,
    pub steiner_count: usize,
    /// Sum of A* leg lengths in meters.
    pub path_length_m: f64,
    /// Sum of straight leg lengths in meters.
    pub straight_length_m: f64,
    pub infeasible_edges_repaired: usize,
    pub detour_choices: DetourChoices,
    pub unreachable_components: Vec<UnreachableComponent>,
    pub partial: bool,
    /// Wall-clock seconds; the only field that varies between runs.
    pub planning_time_s: StageTimes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointRecord {
    pub index: usize,
    pub cell: CellIndex,
    pub world_xy: [f64; 2],
    pub score: f64,
    pub visible_count: usize,
    pub newly_covered: usize,
    pub from_contour: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointsArtifact {
    pub schema_version: u32,
    /// Sensor range in meters.
    pub r: f64,
    pub viewpoints: Vec<ViewpointRecord>,
    pub covered_cells: usize,
    pub reachable_cells: usize,
    pub fallback_used: usize,
    pub partial: bool,
    pub unreachable_components: Vec<UnreachableComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegPath {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub cells: Vec<CellIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourArtifact {
    pub schema_version: u32,
    pub r: f64,
    pub eta: f64,
    pub tour: Tour,
    pub paths: Vec<LegPath>,
}

/// Everything a greedy planning run produced.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub grid: OccupancyGrid,
    pub viewpoint_set: ViewpointSet,
    pub initial_tour: Tour,
    pub tour: Tour,
    pub paths: Vec<GridPath>,
    pub coverage: CoverageMask,
    pub metrics: MetricsReport,
}

impl PlanResult {
    pub fn viewpoints_artifact(&self) -> ViewpointsArtifact {
        let vs = &self.viewpoint_set;
        ViewpointsArtifact {
            schema_version: SCHEMA_VERSION,
            r: vs.r,
            viewpoints: vs
                .viewpoints
                .iter()
                .enumerate()
                .map(|(index, v)| ViewpointRecord {
                    index,
                    cell: v.cell,
                    world_xy: self.grid.world_xy(v.cell),
                    score: v.score,
                    visible_count: v.visible.len(),
                    newly_covered: v.newly_covered,
                    from_contour: v.from_contour,
                })
                .collect(),
            covered_cells: vs.mask.covered_count(),
            reachable_cells: vs.reachable_count,
            fallback_used: vs.fallback_used,
            partial: vs.partial,
            unreachable_components: vs.unreachable.clone(),
        }
    }

    pub fn tour_artifact(&self, eta: f64) -> TourArtifact {
        TourArtifact {
            schema_version: SCHEMA_VERSION,
            r: self.viewpoint_set.r,
            eta,
            tour: self.tour.clone(),
            paths: leg_records(&self.tour.sequence, &self.paths),
        }
    }
}

fn leg_records(sequence: &[usize], paths: &[GridPath]) -> Vec<LegPath> {
    sequence
        .windows(2)
        .zip(paths)
        .map(|(w, p)| LegPath {
            from: w[0],
            to: w[1],
            length: p.length,
            cells: p.cells.clone(),
        })
        .collect()
}

fn percent(mask: &CoverageMask) -> f64 {
    100.0 * coverage_fraction(mask)
}

/// Inflate `raw` and run the greedy planner end to end.
pub fn run_plan(raw: &OccupancyGrid, cfg: &PlanConfig) -> Result<PlanResult, StageError> {
    let grid = inflate(raw, cfg.inflation_radius).map_err(at(Stage::Inflate))?;
    plan_on(grid, cfg)
}

/// Greedy planner on an already inflated grid.
pub fn plan_on(grid: OccupancyGrid, cfg: &PlanConfig) -> Result<PlanResult, StageError> {
    let t0 = Instant::now();
    let r = cfg.sensor_range_r;
    let opts = CoverOptions {
        target: cfg.coverage_target,
        candidate_stride: cfg.candidate_stride,
        ..CoverOptions::default()
    };
    let vs = greedy_cover_with(&grid, r, &opts).map_err(at(Stage::Cover))?;

    let t = Instant::now();
    let cells = vs.cells();
    let gv = build_visibility_graph(&grid, &cells, r);
    let gr = build_roadmap(&grid, &gv, cfg.r_relaxed());
    let graph_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let initial = initial_tsp_tour(&grid, &cells, 0, r, cfg.close_loop).map_err(at(Stage::Tsp))?;
    let tsp_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let tour = finalize_tour(&grid, &initial, &gv, &gr, r, cfg.eta).map_err(at(Stage::Repair))?;
    let repair_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let paths = leg_paths(&grid, &tour.cells()).map_err(at(Stage::Path))?;
    let path_s = t.elapsed().as_secs_f64();

    let node_cells: Vec<CellIndex> = tour.nodes.iter().map(|n| n.cell).collect();
    let coverage = coverage_of(&grid, &node_cells, r);
    let choices = tour
        .repairs
        .iter()
        .fold(DetourChoices::default(), |mut acc, rep| {
            match rep.chosen {
                DetourSource::Visibility => acc.visibility += 1,
                DetourSource::Roadmap => acc.roadmap += 1,
            }
            acc
        });
    let metrics = MetricsReport {
        schema_version: SCHEMA_VERSION,
        planner: "greedy".into(),
        free_cells: coverage.free_count(),
        covered_cells: coverage.covered_count(),
        reachable_cells: vs.reachable_count,
        coverage_percent: percent(&coverage),
        viewpoint_count: tour.unique_node_count(),
        steiner_count: tour.added_viewpoints,
        path_length_m: paths.iter().fold(0.0, |acc, p| acc + p.length),
        straight_length_m: tour.total_length,
        infeasible_edges_repaired: tour.repairs.len(),
        detour_choices: choices,
        unreachable_components: vs.unreachable.clone(),
        partial: vs.partial,
        planning_time_s: StageTimes {
            universe: vs.timings.universe_s,
            greedy: vs.timings.greedy_s,
            graph: graph_s,
            tsp: tsp_s,
            repair: repair_s,
            path: path_s,
            total: t0.elapsed().as_secs_f64(),
        },
    };
    Ok(PlanResult {
        grid,
        viewpoint_set: vs,
        initial_tour: initial,
        tour,
        paths,
        coverage,
        metrics,
    })
}

/// Baseline sweep on an already inflated grid.
pub fn baseline_on(
    grid: &OccupancyGrid,
    cfg: &PlanConfig,
) -> Result<(crate::baseline_bcd::SweepPlan, MetricsReport), StageError> {
    let t0 = Instant::now();
    let r = cfg.sensor_range_r;
    let plan = bcd_plan(grid, r, cfg.lane_spacing()).map_err(at(Stage::Baseline))?;
    let sweep_s = t0.elapsed().as_secs_f64();
    let t = Instant::now();
    let unique = plan.unique_viewpoints();
    let coverage = coverage_of(grid, &unique, r);
    let paths = leg_paths(grid, &plan.viewpoints).unwrap_or_default();
    let path_s = t.elapsed().as_secs_f64();
    let straight = plan
        .viewpoints
        .windows(2)
        .fold(0.0, |acc, w| acc + grid.distance(w[0], w[1]));
    let metrics = MetricsReport {
        schema_version: SCHEMA_VERSION,
        planner: "bcd".into(),
        free_cells: coverage.free_count(),
        covered_cells: coverage.covered_count(),
        reachable_cells: coverage.free_count(),
        coverage_percent: percent(&coverage),
        viewpoint_count: unique.len(),
        steiner_count: 0,
        path_length_m: paths.iter().fold(0.0, |acc, p| acc + p.length),
        straight_length_m: straight,
        infeasible_edges_repaired: 0,
        detour_choices: DetourChoices::default(),
        unreachable_components: Vec::new(),
        partial: plan.jumps > 0,
        planning_time_s: StageTimes {
            greedy: sweep_s,
            path: path_s,
            total: t0.elapsed().as_secs_f64(),
            ..StageTimes::default()
        },
    };
    Ok((plan, metrics))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// Ours over baseline.
    pub viewpoint_count: f64,
    pub path_length: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub ours: MetricsReport,
    pub bcd: MetricsReport,
    pub ratios: Ratios,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Greedy planner and baseline on the same inflated grid.
pub fn run_compare(
    raw: &OccupancyGrid,
    cfg: &PlanConfig,
) -> Result<(PlanResult, CompareReport), StageError> {
    let ours = run_plan(raw, cfg)?;
    let (_, bcd) = baseline_on(&ours.grid, cfg)?;
    let m = &ours.metrics;
    let report = CompareReport {
        schema_version: SCHEMA_VERSION,
        ratios: Ratios {
            viewpoint_count: ratio(m.viewpoint_count as f64, bcd.viewpoint_count as f64),
            path_length: ratio(m.path_length_m, bcd.path_length_m),
            coverage: ratio(m.coverage_percent, bcd.coverage_percent),
        },
        ours: m.clone(),
        bcd,
    };
    Ok((ours, report))
}
