//! Command-line driver.
//!
//! Exit codes: 0 success, 2 coverage shortfall or unreachable free space,
//! 3 stranded tour, 4 I/O, 5 configuration.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::PlanConfig;
use crate::coverage::coverage_of;
use crate::error::Error;
use crate::gridmap::{
    generate_world, load_map_file, save_map_files, GridDump, OccupancyGrid, PgmEncoding,
    WorldRecipe,
};
use crate::pipeline::{run_compare, run_plan, Stage, StageError, TourArtifact};
use crate::render::{default_scale, parse_layers, render_svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COVERAGE: i32 = 2;
pub const EXIT_STRANDED: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_CONFIG: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "scanplan",
    version,
    about = "Viewpoint and scan-tour planning on occupancy grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan viewpoints and a tour; writes viewpoints.json, tour.json,
    /// metrics.json, grid.json and plan.svg.
    Plan(PlanArgs),
    /// Run the planner and the sweep baseline; writes compare.json.
    Compare(PlanArgs),
    /// Render plan artifacts to SVG.
    Render(RenderArgs),
    /// Write a generated world as a PGM map with a YAML sidecar.
    GenWorld(GenArgs),
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// YAML map sidecar.
    #[arg(long, conflicts_with = "recipe", required_unless_present = "recipe")]
    map: Option<PathBuf>,
    /// Generated world, `name[:WxH][@res]`.
    #[arg(long)]
    recipe: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Sensor range in meters.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Inflation radius in meters.
    #[arg(long)]
    inflate: Option<f64>,
    /// Coverage target in (0, 1].
    #[arg(long)]
    target: Option<f64>,
    /// Comma-separated: grid, coverage, path, viewpoints, steiner, or all.
    #[arg(long, default_value = "all")]
    svg_layers: String,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Directory holding grid.json and tour.json.
    artifacts: PathBuf,
    /// Output SVG; defaults to plan.svg in the artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    svg_layers: String,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    recipe: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory; receives map.yaml and map.pgm.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn stage_code(e: &StageError) -> i32 {
    match (&e.error, e.stage) {
        (Error::Io(_), _) => EXIT_IO,
        (Error::InvalidParameter(_), _) => EXIT_CONFIG,
        (Error::NoFreeCells, _) => EXIT_COVERAGE,
        (_, Stage::Repair | Stage::Path) => EXIT_STRANDED,
        _ => EXIT_COVERAGE,
    }
}

fn config_from(args: &PlanArgs) -> Result<PlanConfig, CliError> {
    let mut cfg = PlanConfig::default();
    if let Some(path) = &args.config {
        if !path.exists() {
            return Err(io_err(path, "config file not found"));
        }
        cfg.apply_file(path)
            .map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.r {
        cfg.sensor_range_r = v;
    }
    if let Some(v) = args.eta {
        cfg.eta = v;
    }
    if let Some(v) = args.inflate {
        cfg.inflation_radius = v;
    }
    if let Some(v) = args.target {
        cfg.coverage_target = v;
    }
    cfg.validate()
        .map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    Ok(cfg)
}

fn load_input(args: &PlanArgs, cfg: &PlanConfig) -> Result<OccupancyGrid, CliError> {
    if let Some(path) = &args.map {
        return load_map_file(path).map_err(|e| io_err(path, e));
    }
    let text = args
        .recipe
        .as_deref()
        .expect("clap requires --map or --recipe");
    let recipe = WorldRecipe::parse(text, cfg.seed)
        .map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    generate_world(&recipe).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

fn shortfall(
    partial: bool,
    unreachable: &[crate::coverage::UnreachableComponent],
    percent: f64,
) -> Result<(), CliError> {
    if !partial {
        return Ok(());
    }
    let mut msg = format!("coverage below target ({percent:.3}% of free cells)");
    for comp in unreachable {
        msg.push_str(&format!(
            "; unreachable free component of {} cells at ({}, {})",
            comp.cells, comp.representative.row, comp.representative.col
        ));
    }
    Err(CliError::new(EXIT_COVERAGE, msg))
}

fn cmd_plan(args: &PlanArgs) -> Result<(), CliError> {
    let cfg = config_from(args)?;
    let layers = parse_layers(&args.svg_layers).map_err(|e| CliError::new(EXIT_CONFIG, e))?;
    let raw = load_input(args, &cfg)?;
    let result = run_plan(&raw, &cfg).map_err(|e| CliError::new(stage_code(&e), e.to_string()))?;
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let tour = result.tour_artifact(cfg.eta);
    write_json(&args.out, "grid.json", &GridDump::from_grid(&result.grid))?;
    write_json(&args.out, "viewpoints.json", &result.viewpoints_artifact())?;
    write_json(&args.out, "tour.json", &tour)?;
    write_json(&args.out, "metrics.json", &result.metrics)?;
    let svg = render_svg(
        &result.grid,
        &tour,
        &result.coverage,
        &layers,
        default_scale(&result.grid),
    );
    let svg_path = args.out.join("plan.svg");
    fs::write(&svg_path, svg).map_err(|e| io_err(&svg_path, e))?;
    let m = &result.metrics;
    println!(
        "coverage {:.3}%  viewpoints {}  steiner {}  path {:.3} m  repaired {}",
        m.coverage_percent,
        m.viewpoint_count,
        m.steiner_count,
        m.path_length_m,
        m.infeasible_edges_repaired
    );
    shortfall(m.partial, &m.unreachable_components, m.coverage_percent)
}

fn cmd_compare(args: &PlanArgs) -> Result<(), CliError> {
    let cfg = config_from(args)?;
    let raw = load_input(args, &cfg)?;
    let (_, report) =
        run_compare(&raw, &cfg).map_err(|e| CliError::new(stage_code(&e), e.to_string()))?;
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    write_json(&args.out, "compare.json", &report)?;
    println!(
        "ours {} viewpoints {:.3}%  bcd {} viewpoints {:.3}%  ratio {:.3}",
        report.ours.viewpoint_count,
        report.ours.coverage_percent,
        report.bcd.viewpoint_count,
        report.bcd.coverage_percent,
        report.ratios.viewpoint_count
    );
    shortfall(
        report.ours.partial,
        &report.ours.unreachable_components,
        report.ours.coverage_percent,
    )
}

fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    let layers = parse_layers(&args.svg_layers).map_err(|e| CliError::new(EXIT_CONFIG, e))?;
    let dump: GridDump = read_json(&args.artifacts.join("grid.json"))?;
    let grid = dump
        .to_grid()
        .map_err(|e| io_err(&args.artifacts.join("grid.json"), e))?;
    let tour: TourArtifact = read_json(&args.artifacts.join("tour.json"))?;
    let cells: Vec<_> = tour.tour.nodes.iter().map(|n| n.cell).collect();
    let coverage = coverage_of(&grid, &cells, tour.r);
    let svg = render_svg(&grid, &tour, &coverage, &layers, default_scale(&grid));
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.artifacts.join("plan.svg"));
    fs::write(&out, svg).map_err(|e| io_err(&out, e))
}

fn cmd_gen_world(args: &GenArgs) -> Result<(), CliError> {
    let recipe = WorldRecipe::parse(&args.recipe, args.seed)
        .map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    let grid = generate_world(&recipe).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let yaml = args.out.join("map.yaml");
    save_map_files(&grid, &yaml, PgmEncoding::Binary).map_err(|e| io_err(&yaml, e))?;
    println!(
        "{} -> {} ({}x{} cells)",
        recipe,
        yaml.display(),
        grid.width(),
        grid.height()
    );
    Ok(())
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Render(a) => cmd_render(a),
        Command::GenWorld(a) => cmd_gen_world(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
