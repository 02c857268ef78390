//! Closed-loop navigation episodes.
//!
//! Depth frames arrive at `frame_rate`; each frame is planned on and may
//! replace the executed command. The vehicle and yaw controller run at
//! `control_rate`. An episode ends at the goal, on ground-truth contact, or
//! at the timeout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::collision::DepthIndex;
use crate::depth_image::DepthImage;
use crate::geometry::{bearing, CameraIntrinsics, Pose, Vec3};
use crate::planner::{plan_indexed, CheckOrder, CostKind, PlannerConfig};
use crate::sampling::SamplerKind;
use crate::steering::{decide, steer_reference_yaw, target_bearing, yaw_setpoint, Command, SteeringConfig, SteeringState};
use crate::trajectory::VehicleState;

use super::render::render_depth;
use super::vehicle::{step_vehicle, DEFAULT_YAW_RATE_LIMIT};
use super::world::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Depth-based sampling, direction cost, steering, local-goal yaw.
    Dess,
    /// Uniform sampling, average-velocity cost, camera fixed on the goal.
    FixedYawing,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Dess, Policy::FixedYawing];

    pub fn label(&self) -> &'static str {
        match self {
            Policy::Dess => "dess",
            Policy::FixedYawing => "fixed-yawing",
        }
    }

    pub fn sampler(&self) -> SamplerKind {
        match self {
            Policy::Dess => SamplerKind::DepthBased,
            Policy::FixedYawing => SamplerKind::Uniform,
        }
    }

    pub fn cost(&self) -> CostKind {
        match self {
            Policy::Dess => CostKind::Direction,
            Policy::FixedYawing => CostKind::AverageVelocity,
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub start: Vec3,
    pub goal: Vec3,
    pub goal_radius: f64,
    /// Simulated seconds.
    pub timeout: f64,
    pub frame_rate: f64,
    pub control_rate: f64,
    pub max_range: f64,
    /// Ground-truth contact distance.
    pub vehicle_radius: f64,
    pub yaw_rate_limit: f64,
    pub policy: Policy,
    /// Sampler and cost are overridden by the policy. Samples are checked
    /// endpoint first by default; the verdicts match time order.
    pub planner: PlannerConfig,
    pub steering: SteeringConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            start: Vec3::new(0.0, 0.0, 1.0),
            goal: Vec3::new(17.0, 0.0, 5.0),
            goal_radius: 0.5,
            timeout: 120.0,
            frame_rate: 15.0,
            control_rate: 100.0,
            max_range: 20.0,
            vehicle_radius: 0.2,
            yaw_rate_limit: DEFAULT_YAW_RATE_LIMIT,
            policy: Policy::Dess,
            planner: PlannerConfig {
                check_order: CheckOrder::EndpointFirst,
                ..PlannerConfig::default()
            },
            steering: SteeringConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Collision,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub success: bool,
    pub failure_kind: Option<FailureKind>,
    pub distance_travelled: f64,
    pub elapsed: f64,
    pub steer_episodes: u32,
    pub frames: u64,
}

struct FrameCache {
    pose: Pose,
    image: DepthImage,
    index: DepthIndex,
}

fn frame<'a>(cache: &'a mut Option<FrameCache>, world: &World, pose: Pose, k: &CameraIntrinsics, max_range: f64) -> &'a FrameCache {
    if cache.as_ref().is_none_or(|c| c.pose != pose) {
        let image = render_depth(world, &pose, k, max_range);
        let index = DepthIndex::new(&image);
        *cache = Some(FrameCache { pose, image, index });
    }
    cache.as_ref().expect("filled above")
}

pub fn run_episode<R: Rng + ?Sized>(world: &World, cfg: &EpisodeConfig, rng: &mut R) -> TrialResult {
    let planner = PlannerConfig {
        sampler: cfg.policy.sampler(),
        cost: cfg.policy.cost(),
        ..cfg.planner
    };
    let k = planner.camera;
    let frame_dt = 1.0 / cfg.frame_rate;
    let dt = 1.0 / cfg.control_rate;

    let mut state = VehicleState::at_rest(cfg.start, bearing(&(cfg.goal - cfg.start)));
    let mut steer = SteeringState::new(cfg.start, state.yaw);
    let mut command: Option<Command> = None;
    let mut command_time = 0.0;
    let mut cache = None;
    let mut frames = 0u64;
    let mut distance = 0.0;
    let mut step = 0u64;

    let finish = |failure: Option<FailureKind>, distance: f64, elapsed: f64, steer: &SteeringState, frames: u64| TrialResult {
        success: failure.is_none(),
        failure_kind: failure,
        distance_travelled: distance,
        elapsed,
        steer_episodes: steer.steer_episodes,
        frames,
    };

    loop {
        let t = step as f64 * dt;
        if t >= cfg.timeout {
            return finish(Some(FailureKind::Timeout), distance, t, &steer, frames);
        }
        if t + 1e-9 >= frames as f64 * frame_dt {
            let pose = Pose::new(state.position, state.yaw);
            let f = frame(&mut cache, world, pose, &k, cfg.max_range);
            let outcome = plan_indexed(&f.image, &f.index, &pose, &state, &cfg.goal, &planner, rng);
            frames += 1;
            let next = match cfg.policy {
                Policy::Dess => decide(&outcome, &mut steer, &f.image, &state, frame_dt, dt, &cfg.steering),
                Policy::FixedYawing => outcome.best.map(Command::Trajectory),
            };
            if let Some(c) = next {
                command = Some(c);
                command_time = 0.0;
            }
        }

        let psi_d = match cfg.policy {
            Policy::FixedYawing => bearing(&(cfg.goal - state.position)),
            Policy::Dess => {
                let r_err = steer.hold_position - state.position;
                let psi_r = match &command {
                    Some(Command::Steer { gamma, .. }) => steer_reference_yaw(state.yaw, *gamma, cfg.steering.gain, dt),
                    _ => state.yaw,
                };
                let psi_b = target_bearing(&state.position, &steer.hold_position, &cfg.goal, &cfg.steering);
                let steering = steer.steering_active;
                yaw_setpoint(&r_err, psi_b, steering, psi_r, &mut steer, &cfg.steering)
            }
        };

        command_time += dt;
        let next = step_vehicle(&state, command.as_ref(), command_time, psi_d, dt, cfg.yaw_rate_limit);
        distance += (next.position - state.position).norm();
        state = next;
        step += 1;
        let elapsed = step as f64 * dt;

        if world.signed_distance(&state.position) < cfg.vehicle_radius {
            return finish(Some(FailureKind::Collision), distance, elapsed, &steer, frames);
        }
        if (state.position - cfg.goal).norm() < cfg.goal_radius {
            return finish(None, distance, elapsed, &steer, frames);
        }
    }
}
