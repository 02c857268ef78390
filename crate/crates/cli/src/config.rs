//! JSON experiment configuration. Every field has a default, so `{}` is a
//! valid file; unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use dess_core::simulator::{ClutterParams, EpisodeConfig, Level, Policy};
use dess_core::{CameraIntrinsics, PlannerConfig, Pose, Vec3};
use dess_core::simulator::Sphere;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Free-form label stored with wall-clock results.
    pub hardware_tag: String,
    pub bench: BenchConfig,
    pub navigate: NavigateConfig,
    pub render: RenderConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            hardware_tag: "unspecified".into(),
            bench: BenchConfig::default(),
            navigate: NavigateConfig::default(),
            render: RenderConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetMode {
    Wallclock,
    Candidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub scenarios: usize,
    pub budgets_ms: Vec<f64>,
    pub budget_mode: BudgetMode,
    /// Candidate count per budget millisecond in `candidates` mode.
    pub candidates_per_ms: usize,
    pub seed: u64,
    pub min_obstacles: usize,
    pub max_obstacles: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Obstacle centers are drawn in the view frustum between these depths.
    pub shell_near: f64,
    pub shell_far: f64,
    pub goal_distance: f64,
    pub density_samples: usize,
    pub max_range: f64,
    /// Sampler and budget are set per row.
    pub planner: PlannerConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scenarios: 100,
            budgets_ms: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            budget_mode: BudgetMode::Wallclock,
            candidates_per_ms: 40,
            seed: 0,
            min_obstacles: 5,
            max_obstacles: 60,
            min_radius: 0.1,
            max_radius: 0.6,
            shell_near: 0.5,
            shell_far: 6.0,
            goal_distance: 10.0,
            density_samples: 100_000,
            max_range: 20.0,
            planner: PlannerConfig::default(),
        }
    }
}

/// A navigation world family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scene {
    Easy,
    Medium,
    Hard,
    /// 12 × 8 × 0.5 m slab across the start–goal line.
    Wall,
    /// 4 m radius sphere on the start–goal line.
    Spheroid,
}

impl Scene {
    pub fn label(&self) -> &'static str {
        match self {
            Scene::Easy => "easy",
            Scene::Medium => "medium",
            Scene::Hard => "hard",
            Scene::Wall => "wall",
            Scene::Spheroid => "spheroid",
        }
    }

    pub fn level(&self) -> Option<Level> {
        match self {
            Scene::Easy => Some(Level::Easy),
            Scene::Medium => Some(Level::Medium),
            Scene::Hard => Some(Level::Hard),
            Scene::Wall | Scene::Spheroid => None,
        }
    }
}

impl std::fmt::Display for Scene {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavigateConfig {
    pub trials: usize,
    pub scenes: Vec<Scene>,
    pub policies: Vec<Policy>,
    pub seed: u64,
    /// Policy is set per cell; start and goal are shared with the clutter
    /// generator.
    pub episode: EpisodeConfig,
    pub clutter: ClutterParams,
}

impl Default for NavigateConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            scenes: vec![Scene::Easy, Scene::Medium, Scene::Hard],
            policies: Policy::ALL.to_vec(),
            seed: 0,
            episode: EpisodeConfig::default(),
            clutter: ClutterParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RenderScene {
    Empty,
    Clutter { level: Level, seed: u64 },
    Wall,
    Spheroid,
    Spheres { spheres: Vec<Sphere> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub scene: RenderScene,
    pub pose: Pose,
    pub camera: CameraIntrinsics,
    pub max_range: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            scene: RenderScene::Empty,
            pose: Pose::new(Vec3::new(0.0, 0.0, 1.0), 0.0),
            camera: CameraIntrinsics::default(),
            max_range: 20.0,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let cameras = [
            ("bench.planner.camera", &self.bench.planner.camera),
            ("navigate.episode.planner.camera", &self.navigate.episode.planner.camera),
            ("render.camera", &self.render.camera),
        ];
        for (name, k) in cameras {
            if let Err(e) = k.validate() {
                return bad(format!("{name}: {e}"));
            }
        }
        let b = &self.bench;
        if b.budgets_ms.iter().any(|&ms| !(ms.is_finite() && ms >= 0.0)) {
            return bad("bench.budgets_ms: budgets must be finite and non-negative".into());
        }
        if b.min_obstacles > b.max_obstacles {
            return bad("bench: min_obstacles exceeds max_obstacles".into());
        }
        if !(0.0 < b.min_radius && b.min_radius <= b.max_radius) {
            return bad("bench: need 0 < min_radius <= max_radius".into());
        }
        if !(0.0 < b.shell_near && b.shell_near < b.shell_far) {
            return bad("bench: need 0 < shell_near < shell_far".into());
        }
        if b.shell_far <= b.shell_near + b.planner.collision.radius + b.min_radius {
            return bad("bench: shell_far leaves no room for obstacles beyond the keep-out".into());
        }
        if b.density_samples == 0 {
            return bad("bench.density_samples must be positive".into());
        }
        let e = &self.navigate.episode;
        if !(e.frame_rate > 0.0 && e.control_rate > 0.0 && e.timeout > 0.0) {
            return bad("navigate.episode: rates and timeout must be positive".into());
        }
        if !(self.render.max_range > 0.0) {
            return bad("render.max_range must be positive".into());
        }
        Ok(())
    }
}
