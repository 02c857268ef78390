//! Single-frame planner benchmark over random sphere scenes in front of the
//! camera, sweeping the compute budget for both samplers with paired seeds.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dess_core::simulator::{render_depth, Aabb, Sphere, World};
use dess_core::{deproject, plan_indexed, Budget, CameraIntrinsics, CostKind, DepthIndex, PlannerConfig, Pose, SampleBounds, SamplerKind, Vec3, VehicleState};

use crate::config::{BenchConfig, BudgetMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario_id: usize,
    pub budget_ms: f64,
    pub sampler_kind: SamplerKind,
    /// `inf` when no candidate was feasible.
    pub best_cost: f64,
    pub sampled: u64,
    pub cost_passed: u64,
    pub collision_checked: u64,
    pub collision_free: u64,
    pub pixels_touched: u64,
    /// Occupied fraction of the sampling volume.
    pub l_dens: f64,
}

/// One benchmark scene: the world, the goal, and its estimated density.
#[derive(Debug, Clone)]
pub struct BenchScene {
    pub world: World,
    pub pose: Pose,
    pub goal: Vec3,
    pub l_dens: f64,
}

fn stream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(a.wrapping_mul(1 << 20).wrapping_add(b));
    rng
}

/// Uniform point of the pixel × depth box, as a camera-frame point.
fn sampling_space_point<R: Rng + ?Sized>(rng: &mut R, k: &CameraIntrinsics, near: f64, far: f64) -> Vec3 {
    let x = rng.random_range(-0.5..k.width as f64 - 0.5);
    let y = rng.random_range(-0.5..k.height as f64 - 0.5);
    let d = rng.random_range(near..far);
    deproject(x, y, d, k).expect("positive depth")
}

/// Monte Carlo occupied fraction of the sampling volume, measured the way
/// the uniform sampler draws endpoints (uniform in pixel and depth).
pub fn occupied_fraction<R: Rng + ?Sized>(world: &World, pose: &Pose, k: &CameraIntrinsics, bounds: &SampleBounds, samples: usize, rng: &mut R) -> f64 {
    let hits = (0..samples)
        .filter(|_| {
            let q = sampling_space_point(rng, k, bounds.lower(), bounds.upper());
            world.is_occupied(&pose.camera_to_world(&q))
        })
        .count();
    hits as f64 / samples as f64
}

pub fn bench_scene(cfg: &BenchConfig, scenario_id: usize) -> BenchScene {
    let k = cfg.planner.camera;
    let mut rng = stream(cfg.seed, scenario_id as u64, 0);
    let pose = Pose::new(Vec3::zeros(), 0.0);
    let reach = cfg.shell_far + cfg.max_radius;
    let mut world = World::empty(Aabb::from_extents([-reach, reach, -reach, reach, -reach, reach]));
    let n = rng.random_range(cfg.min_obstacles..=cfg.max_obstacles);
    while world.spheres.len() < n {
        let c = sampling_space_point(&mut rng, &k, cfg.shell_near, cfg.shell_far);
        let r = rng.random_range(cfg.min_radius..=cfg.max_radius);
        // leave the vehicle room to move off its start
        if c.z - r < cfg.shell_near + cfg.planner.collision.radius {
            continue;
        }
        world.spheres.push(Sphere::new(pose.camera_to_world(&c), r));
    }
    let dir = sampling_space_point(&mut rng, &k, 1.0, 2.0).normalize();
    let goal = pose.camera_to_world(&(dir * cfg.goal_distance));
    let l_dens = occupied_fraction(&world, &pose, &k, &cfg.planner.bounds, cfg.density_samples, &mut rng);
    BenchScene { world, pose, goal, l_dens }
}

pub fn budget_for(cfg: &BenchConfig, budget_ms: f64) -> Budget {
    match cfg.budget_mode {
        BudgetMode::Wallclock => Budget::from_millis(budget_ms),
        BudgetMode::Candidates => Budget::Candidates((budget_ms * cfg.candidates_per_ms as f64).round() as usize),
    }
}

const SAMPLERS: [SamplerKind; 2] = [SamplerKind::DepthBased, SamplerKind::Uniform];

/// Rows for one scenario in (budget, sampler) order. Both samplers at a
/// budget share a planner seed.
pub fn bench_scenario(cfg: &BenchConfig, scenario_id: usize) -> Vec<BenchRow> {
    let scene = bench_scene(cfg, scenario_id);
    let k = cfg.planner.camera;
    let img = render_depth(&scene.world, &scene.pose, &k, cfg.max_range);
    let index = DepthIndex::new(&img);
    let state = VehicleState::at_rest(scene.pose.position, scene.pose.yaw);
    let mut rows = Vec::with_capacity(cfg.budgets_ms.len() * SAMPLERS.len());
    for (bi, &budget_ms) in cfg.budgets_ms.iter().enumerate() {
        for sampler in SAMPLERS {
            let planner = PlannerConfig {
                sampler,
                budget: budget_for(cfg, budget_ms),
                ..cfg.planner
            };
            let mut rng = stream(cfg.seed, scenario_id as u64, 1 + bi as u64);
            let out = plan_indexed(&img, &index, &scene.pose, &state, &scene.goal, &planner, &mut rng);
            let c = out.counters;
            rows.push(BenchRow {
                scenario_id,
                budget_ms,
                sampler_kind: sampler,
                best_cost: out.best_cost,
                sampled: c.sampled,
                cost_passed: c.cost_passed,
                collision_checked: c.collision_checked,
                collision_free: c.collision_free,
                pixels_touched: c.pixels_touched,
                l_dens: scene.l_dens,
            });
        }
    }
    rows
}

/// All rows in (scenario, budget, sampler) order. Scenarios run on the
/// rayon pool.
pub fn run_bench(cfg: &BenchConfig) -> Vec<BenchRow> {
    (0..cfg.scenarios)
        .into_par_iter()
        .map(|id| bench_scenario(cfg, id))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Cost charged to a row that found nothing: the worst value the cost can
/// take for endpoints in the sampling range.
pub fn infeasible_cost(planner: &PlannerConfig) -> f64 {
    match planner.cost {
        CostKind::Direction => 1.0,
        CostKind::AverageVelocity => planner.bounds.upper() / planner.durations.min,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchAggregate {
    pub budget_ms: f64,
    pub sampler_kind: SamplerKind,
    pub rows: usize,
    pub feasible_fraction: f64,
    /// Infeasible rows count at the cost's worst value.
    pub mean_best_cost: f64,
    pub mean_sampled: f64,
    pub mean_cost_passed: f64,
    pub mean_collision_checked: f64,
    pub mean_collision_free: f64,
    pub mean_pixels_touched: f64,
}

pub fn aggregate(rows: &[BenchRow], worst_cost: f64) -> Vec<BenchAggregate> {
    let mut cells: BTreeMap<(u64, &str), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.budget_ms.to_bits(), r.sampler_kind.label())).or_default().push(r);
    }
    let mut out: Vec<_> = cells
        .into_values()
        .map(|cell| {
            let n = cell.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| cell.iter().map(|r| f(r)).sum::<f64>() / n;
            BenchAggregate {
                budget_ms: cell[0].budget_ms,
                sampler_kind: cell[0].sampler_kind,
                rows: cell.len(),
                feasible_fraction: mean(&|r| r.best_cost.is_finite() as u8 as f64),
                mean_best_cost: mean(&|r| if r.best_cost.is_finite() { r.best_cost } else { worst_cost }),
                mean_sampled: mean(&|r| r.sampled as f64),
                mean_cost_passed: mean(&|r| r.cost_passed as f64),
                mean_collision_checked: mean(&|r| r.collision_checked as f64),
                mean_collision_free: mean(&|r| r.collision_free as f64),
                mean_pixels_touched: mean(&|r| r.pixels_touched as f64),
            }
        })
        .collect();
    out.sort_by(|a, b| a.budget_ms.total_cmp(&b.budget_ms).then(a.sampler_kind.label().cmp(b.sampler_kind.label())));
    out
}
