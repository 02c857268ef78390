//! Synthetic test environment: worlds, depth rendering, vehicle, episodes.

mod episode;
mod render;
mod scenario;
mod vehicle;
mod world;

pub use episode::{run_episode, EpisodeConfig, FailureKind, Policy, TrialResult};
pub use render::render_depth;
pub use scenario::{generate_scenario, spheroid_world, wall_world, ClutterParams, Level, ScenarioError, ScenarioSpec};
pub use vehicle::{step_vehicle, DEFAULT_YAW_RATE_LIMIT};
pub use world::{Aabb, Sphere, World};
