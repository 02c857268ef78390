//! Budgeted sample-evaluate-check planning loop.
//!
//! Each candidate goes through: draw an endpoint, build the rest-to-rest
//! quintic, score it, and only if it beats the current best, gate on peak
//! speed and run the collision check. The best collision-free candidate wins.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collision::{check_indexed, is_free_indexed, CollisionConfig, DepthIndex};
use crate::depth_image::DepthImage;
use crate::geometry::{CameraIntrinsics, Pose, Vec3};
use crate::sampling::{SampleBounds, SamplerKind};
use crate::trajectory::{duration_for, plan_to_rest, DurationLimits, PolynomialTrajectory, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CostError {
    #[error("cost undefined: goal or endpoint coincides with the vehicle position")]
    DegenerateGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// Alignment of the endpoint direction with the goal direction.
    Direction,
    /// Negated progress rate toward the goal.
    AverageVelocity,
}

/// `d · (O − P) / ‖O − P‖` with `d` the unit vector from `O` to `G`.
/// In `[−1, 1]`; `−1` points straight at the goal.
pub fn direction_cost(origin: &Vec3, goal: &Vec3, endpoint: &Vec3) -> Result<f64, CostError> {
    let to_goal = goal - origin;
    let back = origin - endpoint;
    let (ng, nb) = (to_goal.norm(), back.norm());
    if ng == 0.0 || nb == 0.0 {
        return Err(CostError::DegenerateGeometry);
    }
    Ok((to_goal.dot(&back) / (ng * nb)).clamp(-1.0, 1.0))
}

/// `−(d · (P − O)) / T`.
pub fn average_velocity_cost(origin: &Vec3, goal: &Vec3, endpoint: &Vec3, duration: f64) -> Result<f64, CostError> {
    let to_goal = goal - origin;
    let ng = to_goal.norm();
    if ng == 0.0 || !(duration > 0.0) {
        return Err(CostError::DegenerateGeometry);
    }
    Ok(-(to_goal.dot(&(endpoint - origin)) / ng) / duration)
}

/// When to stop drawing candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Budget {
    /// Wall-clock allowance, checked once per candidate.
    WallClock(Duration),
    /// Fixed number of candidates; reproducible across machines.
    Candidates(usize),
}

impl Budget {
    pub fn from_millis(ms: f64) -> Self {
        Budget::WallClock(Duration::from_secs_f64(ms / 1000.0))
    }
}

/// Order in which a candidate's trajectory samples are checked. Both give
/// the same verdict; they differ in how soon a rejection is found and so in
/// time spent and pixels touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckOrder {
    /// Forward in time, stopping at the first violation.
    Time,
    /// Endpoint first, then a coarse stride, then the rest.
    EndpointFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub bounds: SampleBounds,
    pub collision: CollisionConfig,
    /// Desired speed, m/s. Durations are `distance / v_des` (clamped) and
    /// trajectories peaking above `2·v_des` are discarded.
    pub v_des: f64,
    pub budget: Budget,
    pub sampler: SamplerKind,
    pub cost: CostKind,
    pub durations: DurationLimits,
    pub camera: CameraIntrinsics,
    pub check_order: CheckOrder,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            bounds: SampleBounds::default(),
            collision: CollisionConfig::default(),
            v_des: 1.0,
            budget: Budget::WallClock(Duration::from_millis(10)),
            sampler: SamplerKind::DepthBased,
            cost: CostKind::Direction,
            durations: DurationLimits::default(),
            camera: CameraIntrinsics::default(),
            check_order: CheckOrder::Time,
        }
    }
}

/// Per-stage candidate counts for one planning call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCounters {
    pub sampled: u64,
    /// Candidates whose cost beat the running best.
    pub cost_passed: u64,
    pub collision_checked: u64,
    pub collision_free: u64,
    pub pixels_touched: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub best: Option<PolynomialTrajectory>,
    /// `+∞` when nothing feasible was found.
    pub best_cost: f64,
    pub counters: PlanCounters,
}

impl PlanOutcome {
    pub fn is_feasible(&self) -> bool {
        self.best.is_some()
    }
}

fn candidate_cost(
    kind: CostKind,
    origin: &Vec3,
    goal: &Vec3,
    endpoint: &Vec3,
    duration: f64,
) -> Result<f64, CostError> {
    match kind {
        CostKind::Direction => direction_cost(origin, goal, endpoint),
        CostKind::AverageVelocity => average_velocity_cost(origin, goal, endpoint, duration),
    }
}

/// Plans against one depth frame. `pose` is the camera pose the frame was
/// taken from; trajectories start from `state`.
pub fn plan<R: Rng + ?Sized>(
    img: &DepthImage,
    pose: &Pose,
    state: &VehicleState,
    goal: &Vec3,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> PlanOutcome {
    let index = DepthIndex::new(img);
    plan_indexed(img, &index, pose, state, goal, cfg, rng)
}

/// As [`plan`], reusing a prebuilt index of `img`.
pub fn plan_indexed<R: Rng + ?Sized>(
    img: &DepthImage,
    index: &DepthIndex,
    pose: &Pose,
    state: &VehicleState,
    goal: &Vec3,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> PlanOutcome {
    let started = Instant::now();
    let mut out = PlanOutcome {
        best: None,
        best_cost: f64::INFINITY,
        counters: PlanCounters::default(),
    };
    let c = &mut out.counters;
    loop {
        let more = match cfg.budget {
            Budget::WallClock(limit) => started.elapsed() < limit,
            Budget::Candidates(n) => (c.sampled as usize) < n,
        };
        if !more {
            break;
        }
        let cand = cfg.sampler.sample(rng, img, &cfg.camera, &cfg.bounds, pose);
        c.sampled += 1;
        let duration = duration_for(&cand.endpoint_world, state, cfg.v_des, &cfg.durations);
        let Ok(cost) = candidate_cost(cfg.cost, &state.position, goal, &cand.endpoint_world, duration) else {
            continue;
        };
        if !(cost < out.best_cost) {
            continue;
        }
        c.cost_passed += 1;
        let traj = plan_to_rest(state, cand.endpoint_world, duration).expect("duration limits are positive");
        if traj.peak_speed() > 2.0 * cfg.v_des {
            continue;
        }
        c.collision_checked += 1;
        let (free, touched) = match cfg.check_order {
            CheckOrder::Time => {
                let r = check_indexed(&traj, index, &cfg.camera, pose, &cfg.collision);
                (r.verdict.is_free(), r.pixels_touched)
            }
            CheckOrder::EndpointFirst => is_free_indexed(&traj, index, &cfg.camera, pose, &cfg.collision),
        };
        c.pixels_touched += touched;
        if free {
            c.collision_free += 1;
            out.best_cost = cost;
            out.best = Some(traj);
        }
    }
    out
}
