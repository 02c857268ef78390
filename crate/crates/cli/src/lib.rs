//! Experiment front end: planner budget sweeps, closed-loop navigation
//! trials and depth dumps, driven by one JSON config.

// negated comparisons are used on purpose to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod navigate;
pub mod pgm;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use dess_core::simulator::{generate_scenario, render_depth, spheroid_world, wall_world, ClutterParams, ScenarioSpec, World};
use dess_core::DepthImage;

pub use bench::{BenchAggregate, BenchRow};
pub use config::{BenchConfig, BudgetMode, Config, NavigateConfig, RenderConfig, RenderScene, Scene};
pub use error::CliError;
pub use navigate::{NavSummary, TrialRow};

pub const BENCH_CSV: &str = "bench.csv";
pub const BENCH_JSON: &str = "bench_summary.json";
pub const TRIALS_CSV: &str = "trials.csv";
pub const NAV_JSON: &str = "nav_summary.json";

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r).map_err(|e| CliError::from((path.to_path_buf(), e)))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct BenchReport<'a> {
    hardware_tag: &'a str,
    config: &'a BenchConfig,
    aggregates: Vec<BenchAggregate>,
}

#[derive(Serialize)]
struct NavReport<'a> {
    hardware_tag: &'a str,
    config: &'a NavigateConfig,
    summaries: Vec<NavSummary>,
}

/// Runs the budget sweep and writes the per-row CSV and the aggregate JSON
/// into `out_dir`. Returns the rows.
pub fn cmd_bench(cfg: &Config, out_dir: &Path) -> Result<Vec<BenchRow>, CliError> {
    create_dir(out_dir)?;
    let rows = bench::run_bench(&cfg.bench);
    write_csv(&out_dir.join(BENCH_CSV), &rows)?;
    let report = BenchReport {
        hardware_tag: &cfg.hardware_tag,
        config: &cfg.bench,
        aggregates: bench::aggregate(&rows, bench::infeasible_cost(&cfg.bench.planner)),
    };
    write_json(&out_dir.join(BENCH_JSON), &report)?;
    Ok(rows)
}

/// Runs every navigation cell and writes per-trial rows and summaries.
pub fn cmd_navigate(cfg: &Config, out_dir: &Path) -> Result<(Vec<TrialRow>, Vec<NavSummary>), CliError> {
    create_dir(out_dir)?;
    let rows = navigate::run_navigate(&cfg.navigate).map_err(|e| CliError::Config(format!("navigate.clutter: {e}")))?;
    write_csv(&out_dir.join(TRIALS_CSV), &rows)?;
    let summaries = navigate::summarize(&rows);
    let report = NavReport {
        hardware_tag: &cfg.hardware_tag,
        config: &cfg.navigate,
        summaries: summaries.clone(),
    };
    write_json(&out_dir.join(NAV_JSON), &report)?;
    Ok((rows, summaries))
}

pub fn render_world(scene: &RenderScene, clutter: &ClutterParams) -> Result<World, CliError> {
    let (start, goal) = (clutter.start, clutter.goal);
    Ok(match scene {
        RenderScene::Empty => World::empty(clutter.bounds),
        RenderScene::Clutter { level, seed } => {
            generate_scenario(&ScenarioSpec { level: *level, seed: *seed }, clutter).map_err(|e| CliError::Config(format!("render.scene: {e}")))?
        }
        RenderScene::Wall => wall_world(&start, &goal),
        RenderScene::Spheroid => spheroid_world(&start, &goal),
        RenderScene::Spheres { spheres } => World {
            spheres: spheres.clone(),
            slabs: Vec::new(),
            bounds: clutter.bounds,
        },
    })
}

/// Renders the configured view and writes it as a 16-bit PGM.
pub fn cmd_render(cfg: &Config, out: &Path) -> Result<DepthImage, CliError> {
    let r = &cfg.render;
    let world = render_world(&r.scene, &cfg.navigate.clutter)?;
    let img = render_depth(&world, &r.pose, &r.camera, r.max_range);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let file = File::create(out).map_err(|e| CliError::io(out, e))?;
    let mut w = BufWriter::new(file);
    pgm::write_pgm(&img, &mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(out, e))?;
    Ok(img)
}
