//! Stuck detection, depth-based steering and yaw-setpoint selection.
//!
//! When no feasible trajectory has been found for `stuck_threshold` seconds
//! and the vehicle has come to rest, the vehicle holds position and turns
//! away from the image half containing the nearest depth return, until a
//! frame yields a feasible trajectory again.
//!
//! Yaw convention: world yaw is counter-clockwise about `+z`. The steering
//! sign `γ = +1` means "turn right", which is a decreasing world yaw. The
//! accumulation rule [`steering_yaw`] is stated in clockwise-positive
//! heading; [`steer_reference_yaw`] converts to world yaw.

use serde::{Deserialize, Serialize};

use crate::depth_image::{DepthImage, DepthImageError};
use crate::geometry::{bearing, normalize_angle, Vec3};
use crate::planner::PlanOutcome;
use crate::trajectory::{PolynomialTrajectory, VehicleState};

/// Which point the camera faces while far from the commanded endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum YawTarget {
    /// Endpoint of the trajectory being executed.
    #[default]
    LocalGoal,
    /// The mission goal.
    GlobalGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteeringConfig {
    /// Yaw accumulation gain `K_p`, rad/s.
    pub gain: f64,
    /// Seconds without a feasible trajectory before steering.
    pub stuck_threshold: f64,
    /// Beyond this distance from the commanded endpoint, face the target.
    pub local_goal_distance: f64,
    pub yaw_target: YawTarget,
    /// "At rest" means within this distance of the hold position...
    pub rest_position_tolerance: f64,
    /// ...and slower than this.
    pub rest_speed_tolerance: f64,
}

impl Default for SteeringConfig {
    fn default() -> Self {
        Self {
            gain: 0.6,
            stuck_threshold: 1.0,
            local_goal_distance: 1.0,
            yaw_target: YawTarget::LocalGoal,
            rest_position_tolerance: 0.2,
            rest_speed_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringState {
    pub time_without_feasible: f64,
    pub steering_active: bool,
    /// Endpoint of the last executed trajectory.
    pub hold_position: Vec3,
    /// Last yaw setpoint sent to the controller.
    pub psi_d_prev: f64,
    /// Number of times steering switched on.
    pub steer_episodes: u32,
    /// Sign chosen from the latest frame while steering.
    pub gamma: f64,
}

impl SteeringState {
    /// State before any trajectory was executed: hold where the vehicle is.
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            time_without_feasible: 0.0,
            steering_active: false,
            hold_position: position,
            psi_d_prev: yaw,
            steer_episodes: 0,
            gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    Trajectory(PolynomialTrajectory),
    /// Hold `position` and turn in direction `gamma` (`+1` right).
    Steer { position: Vec3, gamma: f64, yaw: f64 },
}

/// `+1` (turn right) when the nearest return is in the left half of the
/// image, `−1` otherwise.
pub fn steering_sign(img: &DepthImage) -> Result<f64, DepthImageError> {
    let nearest = img.nearest_point()?;
    Ok(if (nearest.x as f64) < img.width() as f64 / 2.0 { 1.0 } else { -1.0 })
}

/// `ψ_r = ψ_f + γ·K_p·Δt`, in clockwise-positive heading, normalized.
pub fn steering_yaw(psi_f: f64, gamma: f64, gain: f64, dt: f64) -> f64 {
    normalize_angle(psi_f + gamma * gain * dt)
}

/// [`steering_yaw`] applied to a counter-clockwise world yaw.
pub fn steer_reference_yaw(world_yaw: f64, gamma: f64, gain: f64, dt: f64) -> f64 {
    -steering_yaw(-world_yaw, gamma, gain, dt)
}

/// Chooses the next command from a planning result. `None` means keep
/// executing the previous command.
pub fn decide(
    outcome: &PlanOutcome,
    st: &mut SteeringState,
    img: &DepthImage,
    vehicle: &VehicleState,
    frame_dt: f64,
    control_dt: f64,
    cfg: &SteeringConfig,
) -> Option<Command> {
    if let Some(best) = &outcome.best {
        st.time_without_feasible = 0.0;
        st.steering_active = false;
        st.hold_position = best.endpoint();
        return Some(Command::Trajectory(best.clone()));
    }
    st.time_without_feasible += frame_dt;
    let at_rest = (vehicle.position - st.hold_position).norm() <= cfg.rest_position_tolerance
        && vehicle.speed() < cfg.rest_speed_tolerance;
    if st.time_without_feasible <= cfg.stuck_threshold || !at_rest {
        return None;
    }
    // the side is chosen once per steering episode; re-deciding every frame
    // lets the nearest return hop between halves and the yaw dither in place.
    // An image with no returns keeps the previous side.
    if !st.steering_active {
        if let Ok(g) = steering_sign(img) {
            st.gamma = g;
        }
        st.steering_active = true;
        st.steer_episodes += 1;
    }
    Some(Command::Steer {
        position: st.hold_position,
        gamma: st.gamma,
        yaw: steer_reference_yaw(vehicle.yaw, st.gamma, cfg.gain, control_dt),
    })
}

/// Yaw setpoint selection. `target` is the point faced while far from the
/// commanded endpoint; `psi_r` the steering reference yaw.
pub fn yaw_setpoint(r_err: &Vec3, target_bearing: f64, steering: bool, psi_r: f64, st: &mut SteeringState, cfg: &SteeringConfig) -> f64 {
    let psi_d = if r_err.norm() > cfg.local_goal_distance {
        target_bearing
    } else if steering {
        psi_r
    } else {
        st.psi_d_prev
    };
    st.psi_d_prev = psi_d;
    psi_d
}

/// Bearing to face for the configured yaw target.
pub fn target_bearing(position: &Vec3, local_goal: &Vec3, global_goal: &Vec3, cfg: &SteeringConfig) -> f64 {
    let target = match cfg.yaw_target {
        YawTarget::LocalGoal => local_goal,
        YawTarget::GlobalGoal => global_goal,
    };
    bearing(&(target - position))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::PlanCounters;
    use crate::trajectory::plan_to_rest;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn image_with_nearest(x: u32) -> DepthImage {
        let mut img = DepthImage::filled(320, 240, 5.0);
        img.set(x, 100, 1.0);
        img
    }

    fn none() -> PlanOutcome {
        PlanOutcome {
            best: None,
            best_cost: f64::INFINITY,
            counters: PlanCounters::default(),
        }
    }

    fn some(endpoint: Vec3) -> PlanOutcome {
        let traj = plan_to_rest(&VehicleState::at_rest(Vec3::zeros(), 0.0), endpoint, 2.0).unwrap();
        PlanOutcome {
            best: Some(traj),
            best_cost: -1.0,
            counters: PlanCounters::default(),
        }
    }

    #[test]
    fn sign_follows_nearest_column() {
        assert_eq!(steering_sign(&image_with_nearest(10)).unwrap(), 1.0);
        assert_eq!(steering_sign(&image_with_nearest(300)).unwrap(), -1.0);
        assert_eq!(steering_sign(&image_with_nearest(160)).unwrap(), -1.0);
        assert_eq!(steering_sign(&image_with_nearest(159)).unwrap(), 1.0);
        assert_eq!(steering_sign(&DepthImage::invalid(320, 240)), Err(DepthImageError::NoValidPixel));
    }

    #[test]
    fn steering_yaw_formula() {
        assert_relative_eq!(steering_yaw(0.0, 1.0, 0.6, 1.0 / 30.0), 0.02, epsilon = 1e-15);
        assert_relative_eq!(steering_yaw(0.0, -1.0, 0.6, 1.0 / 30.0), -0.02, epsilon = 1e-15);
        let wrapped = steering_yaw(PI - 0.01, 1.0, 0.6, 1.0 / 30.0);
        assert_relative_eq!(wrapped, -PI + 0.01, epsilon = 1e-12);
    }

    #[test]
    fn turning_right_decreases_world_yaw() {
        assert!(steer_reference_yaw(0.3, 1.0, 0.6, 0.01) < 0.3);
        assert!(steer_reference_yaw(0.3, -1.0, 0.6, 0.01) > 0.3);
    }

    #[test]
    fn feasible_plan_is_forwarded() {
        let mut st = SteeringState::new(Vec3::zeros(), 0.0);
        st.steering_active = true;
        st.time_without_feasible = 3.0;
        let vehicle = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let cmd = decide(&some(Vec3::new(2.0, 0.0, 0.0)), &mut st, &image_with_nearest(10), &vehicle, 1.0 / 15.0, 0.01, &SteeringConfig::default());
        assert!(matches!(cmd, Some(Command::Trajectory(_))));
        assert!(!st.steering_active);
        assert_eq!(st.time_without_feasible, 0.0);
        assert_eq!(st.hold_position, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn steers_after_threshold_at_rest() {
        let cfg = SteeringConfig::default();
        let hold = Vec3::new(2.0, 0.0, 1.0);
        let mut st = SteeringState::new(hold, 0.0);
        let vehicle = VehicleState::at_rest(hold, 0.0);
        let img = image_with_nearest(10);
        let dt = 0.1;
        let mut first_steer = None;
        for i in 0..12 {
            let cmd = decide(&none(), &mut st, &img, &vehicle, dt, 0.01, &cfg);
            if let Some(Command::Steer { position, gamma, .. }) = cmd {
                assert_eq!(position, hold);
                assert_eq!(gamma, 1.0);
                first_steer.get_or_insert(i);
            } else {
                assert!(cmd.is_none());
            }
        }
        // 0.5 s: nothing; first steer once more than one second has passed
        assert_eq!(first_steer, Some(10));
        assert_eq!(st.steer_episodes, 1);
        assert!(st.steering_active);
    }

    #[test]
    fn no_steer_while_moving() {
        let cfg = SteeringConfig::default();
        let mut st = SteeringState::new(Vec3::zeros(), 0.0);
        let mut vehicle = VehicleState::at_rest(Vec3::new(1.0, 0.0, 0.0), 0.0);
        vehicle.velocity = Vec3::new(0.5, 0.0, 0.0);
        for _ in 0..30 {
            assert!(decide(&none(), &mut st, &image_with_nearest(10), &vehicle, 0.1, 0.01, &cfg).is_none());
        }
        assert_eq!(st.steer_episodes, 0);
    }

    #[test]
    fn steer_episodes_count_rising_edges() {
        let cfg = SteeringConfig::default();
        let mut st = SteeringState::new(Vec3::zeros(), 0.0);
        let vehicle = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let img = image_with_nearest(300);
        for _ in 0..2 {
            for _ in 0..20 {
                decide(&none(), &mut st, &img, &vehicle, 0.1, 0.01, &cfg);
            }
            decide(&some(Vec3::zeros()), &mut st, &img, &vehicle, 0.1, 0.01, &cfg);
        }
        assert_eq!(st.steer_episodes, 2);
    }

    #[test]
    fn turn_direction_is_kept_within_an_episode() {
        let cfg = SteeringConfig::default();
        let mut st = SteeringState::new(Vec3::zeros(), 0.0);
        let vehicle = VehicleState::at_rest(Vec3::zeros(), 0.0);
        for _ in 0..20 {
            decide(&none(), &mut st, &image_with_nearest(10), &vehicle, 0.1, 0.01, &cfg);
        }
        assert!(st.steering_active);
        let cmd = decide(&none(), &mut st, &image_with_nearest(300), &vehicle, 0.1, 0.01, &cfg);
        assert!(matches!(cmd, Some(Command::Steer { gamma, .. }) if gamma == 1.0));
        // a fresh episode picks the side again
        decide(&some(Vec3::zeros()), &mut st, &image_with_nearest(300), &vehicle, 0.1, 0.01, &cfg);
        let mut last = None;
        for _ in 0..20 {
            last = decide(&none(), &mut st, &image_with_nearest(300), &vehicle, 0.1, 0.01, &cfg).or(last);
        }
        assert!(matches!(last, Some(Command::Steer { gamma, .. }) if gamma == -1.0));
    }

    #[test]
    fn yaw_setpoint_branches() {
        let cfg = SteeringConfig::default();
        let mut st = SteeringState::new(Vec3::zeros(), 0.0);
        assert_eq!(yaw_setpoint(&Vec3::new(3.0, 0.0, 0.0), 0.4, false, 0.0, &mut st, &cfg), 0.4);
        assert_eq!(st.psi_d_prev, 0.4);
        assert_eq!(yaw_setpoint(&Vec3::new(0.5, 0.0, 0.0), 0.4, true, 0.1, &mut st, &cfg), 0.1);
        st.psi_d_prev = 0.7;
        assert_eq!(yaw_setpoint(&Vec3::new(0.5, 0.0, 0.0), 0.4, false, 0.1, &mut st, &cfg), 0.7);
    }

    #[test]
    fn continuous_steering_accumulates_linearly() {
        let (gain, dt) = (0.6, 0.01);
        let mut yaw = 0.0;
        let n = 200;
        for _ in 0..n {
            yaw = steer_reference_yaw(yaw, 1.0, gain, dt);
        }
        assert!((yaw + gain * dt * n as f64).abs() <= gain * dt);
    }

    proptest! {
        #[test]
        fn sign_is_scale_invariant(x in 0u32..320, y in 0u32..240, s in 0.1f32..10.0) {
            let mut img = DepthImage::filled(320, 240, 5.0);
            img.set(x, y, 1.0);
            let scaled = DepthImage::from_fn(320, 240, |i, j| img.query(i, j).unwrap().unwrap() as f32 * s);
            prop_assert_eq!(steering_sign(&img).unwrap(), steering_sign(&scaled).unwrap());
        }

        #[test]
        fn steering_yaw_is_normalized(psi in -10.0f64..10.0, g in prop::bool::ANY, dt in 1e-3f64..1.0) {
            let gamma = if g { 1.0 } else { -1.0 };
            let r = steering_yaw(psi, gamma, 0.6, dt);
            prop_assert!(r > -PI && r <= PI);
        }
    }
}
