//! Closed-loop navigation trials per (scene, policy) cell.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dess_core::simulator::{generate_scenario, run_episode, spheroid_world, wall_world, EpisodeConfig, FailureKind, Policy, ScenarioError, ScenarioSpec, World};

use crate::config::{NavigateConfig, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub scene: Scene,
    pub policy: Policy,
    pub trial: usize,
    pub world_seed: u64,
    pub success: bool,
    /// Empty on success.
    pub failure_kind: Option<FailureKind>,
    pub distance_travelled: f64,
    pub elapsed: f64,
    pub steer_episodes: u32,
    pub frames: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavSummary {
    pub level: Scene,
    pub policy: Policy,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub collisions: usize,
    pub timeouts: usize,
    /// Distance and time statistics cover successful trials; standard
    /// deviations use the n − 1 denominator and are 0 below two samples.
    pub mean_distance: f64,
    pub std_distance: f64,
    pub mean_time: f64,
    pub std_time: f64,
    pub mean_steer_episodes: f64,
    pub max_steer_episodes: u32,
}

pub fn world_seed(cfg: &NavigateConfig, trial: usize) -> u64 {
    cfg.seed.wrapping_add(trial as u64)
}

pub fn scene_world(cfg: &NavigateConfig, scene: Scene, trial: usize) -> Result<World, ScenarioError> {
    let (start, goal) = (cfg.episode.start, cfg.episode.goal);
    match scene.level() {
        Some(level) => generate_scenario(&ScenarioSpec { level, seed: world_seed(cfg, trial) }, &cfg.clutter),
        None if scene == Scene::Wall => Ok(wall_world(&start, &goal)),
        None => Ok(spheroid_world(&start, &goal)),
    }
}

/// Episode rng for a trial, shared by both policies.
fn episode_rng(cfg: &NavigateConfig, scene: Scene, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(world_seed(cfg, trial));
    rng.set_stream(1 + scene as u64);
    rng
}

pub fn run_trial(cfg: &NavigateConfig, scene: Scene, policy: Policy, trial: usize) -> Result<TrialRow, ScenarioError> {
    let world = scene_world(cfg, scene, trial)?;
    let episode = EpisodeConfig { policy, ..cfg.episode };
    let r = run_episode(&world, &episode, &mut episode_rng(cfg, scene, trial));
    Ok(TrialRow {
        scene,
        policy,
        trial,
        world_seed: world_seed(cfg, trial),
        success: r.success,
        failure_kind: r.failure_kind,
        distance_travelled: r.distance_travelled,
        elapsed: r.elapsed,
        steer_episodes: r.steer_episodes,
        frames: r.frames,
    })
}

/// All trials in (scene, policy, trial) order, run on the rayon pool.
pub fn run_navigate(cfg: &NavigateConfig) -> Result<Vec<TrialRow>, ScenarioError> {
    let mut jobs = Vec::new();
    for &scene in &cfg.scenes {
        for &policy in &cfg.policies {
            for trial in 0..cfg.trials {
                jobs.push((scene, policy, trial));
            }
        }
    }
    jobs.into_par_iter().map(|(s, p, t)| run_trial(cfg, s, p, t)).collect()
}

/// Sample mean and standard deviation (n − 1).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(rows: &[TrialRow]) -> Vec<NavSummary> {
    let mut keys: Vec<(Scene, Policy)> = rows.iter().map(|r| (r.scene, r.policy)).collect();
    keys.dedup();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(scene, policy)| {
            let cell: Vec<&TrialRow> = rows.iter().filter(|r| r.scene == scene && r.policy == policy).collect();
            let ok: Vec<&&TrialRow> = cell.iter().filter(|r| r.success).collect();
            let (mean_distance, std_distance) = mean_std(&ok.iter().map(|r| r.distance_travelled).collect::<Vec<_>>());
            let (mean_time, std_time) = mean_std(&ok.iter().map(|r| r.elapsed).collect::<Vec<_>>());
            let count = |k: FailureKind| cell.iter().filter(|r| r.failure_kind == Some(k)).count();
            NavSummary {
                level: scene,
                policy,
                trials: cell.len(),
                successes: ok.len(),
                success_rate: ok.len() as f64 / cell.len() as f64,
                collisions: count(FailureKind::Collision),
                timeouts: count(FailureKind::Timeout),
                mean_distance,
                std_distance,
                mean_time,
                std_time,
                mean_steer_episodes: cell.iter().map(|r| r.steer_episodes as f64).sum::<f64>() / cell.len() as f64,
                max_steer_episodes: cell.iter().map(|r| r.steer_episodes).max().unwrap_or(0),
            }
        })
        .collect()
}
