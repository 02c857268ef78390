//! Random sphere clutter and single-obstacle test worlds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

use super::world::{Aabb, Sphere, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Easy,
    Medium,
    Hard,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Easy, Level::Medium, Level::Hard];

    pub fn obstacle_count(&self) -> usize {
        match self {
            Level::Easy => 29,
            Level::Medium => 51,
            Level::Hard => 67,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Level::Easy => "easy",
            Level::Medium => "medium",
            Level::Hard => "hard",
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub level: Level,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterParams {
    pub bounds: Aabb,
    pub min_diameter: f64,
    pub max_diameter: f64,
    /// Points kept clear of obstacles (inflated by vehicle radius + clearance).
    pub start: Vec3,
    pub goal: Vec3,
    pub vehicle_radius: f64,
    pub clearance: f64,
    pub max_rejections: usize,
}

impl Default for ClutterParams {
    fn default() -> Self {
        Self {
            bounds: Aabb::from_extents([0.0, 15.0, -5.0, 5.0, 0.0, 10.0]),
            min_diameter: 0.1,
            max_diameter: 4.0,
            start: Vec3::new(0.0, 0.0, 1.0),
            goal: Vec3::new(17.0, 0.0, 5.0),
            vehicle_radius: 0.2,
            clearance: 0.3,
            max_rejections: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("obstacle generation gave up after {0} rejected draws")]
    GenerationFailure(usize),
}

/// Draws the densest level's spheres in sequence and keeps the first
/// `level.obstacle_count()`, so lower levels are prefixes of higher ones.
pub fn generate_scenario(spec: &ScenarioSpec, params: &ClutterParams) -> Result<World, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (params.bounds.min, params.bounds.max);
    let mut world = World::empty(params.bounds);
    let mut rejections = 0;
    let total = Level::Hard.obstacle_count().max(spec.level.obstacle_count());
    while world.spheres.len() < total {
        let center = Vec3::new(
            rng.random_range(lo.x..=hi.x),
            rng.random_range(lo.y..=hi.y),
            rng.random_range(lo.z..=hi.z),
        );
        let radius = rng.random_range(params.min_diameter..=params.max_diameter) / 2.0;
        let keep_out = radius + params.vehicle_radius + params.clearance;
        if (center - params.start).norm() <= keep_out || (center - params.goal).norm() <= keep_out {
            rejections += 1;
            if rejections >= params.max_rejections {
                return Err(ScenarioError::GenerationFailure(rejections));
            }
            continue;
        }
        world.spheres.push(Sphere::new(center, radius));
    }
    world.spheres.truncate(spec.level.obstacle_count());
    Ok(world)
}

/// Point on the segment from `start` to `goal` at world `x`.
fn on_line(start: &Vec3, goal: &Vec3, x: f64) -> Vec3 {
    let s = (x - start.x) / (goal.x - start.x);
    start + (goal - start) * s
}

/// A 0.5 m thick, 12 m wide, 8 m tall wall across the start–goal line.
pub fn wall_world(start: &Vec3, goal: &Vec3) -> World {
    let c = on_line(start, goal, 8.25);
    let slab = Aabb::from_extents([8.0, 8.5, c.y - 6.0, c.y + 6.0, c.z - 4.0, c.z + 4.0]);
    World {
        spheres: Vec::new(),
        slabs: vec![slab],
        bounds: Aabb::from_extents([0.0, 15.0, -6.0, 6.0, c.z - 4.0, c.z + 4.0]),
    }
}

/// A single 4 m radius sphere centred on the start–goal line.
pub fn spheroid_world(start: &Vec3, goal: &Vec3) -> World {
    let c = on_line(start, goal, 8.5);
    World {
        spheres: vec![Sphere::new(c, 4.0)],
        slabs: Vec::new(),
        bounds: Aabb::from_extents([4.5, 12.5, c.y - 4.0, c.y + 4.0, c.z - 4.0, c.z + 4.0]),
    }
}
