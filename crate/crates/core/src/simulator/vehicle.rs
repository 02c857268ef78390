//! Idealized vehicle: exact trajectory tracking, rate-limited yaw.

use crate::geometry::{angle_diff, normalize_angle};
use crate::steering::Command;
use crate::trajectory::VehicleState;

pub const DEFAULT_YAW_RATE_LIMIT: f64 = 1.5;

/// Advances the vehicle by `dt`. `command_time` is the time since the
/// command was issued, at the end of this step. Translation follows the
/// command exactly; yaw moves toward `yaw_setpoint` at most
/// `yaw_rate_limit · dt`.
pub fn step_vehicle(
    state: &VehicleState,
    command: Option<&Command>,
    command_time: f64,
    yaw_setpoint: f64,
    dt: f64,
    yaw_rate_limit: f64,
) -> VehicleState {
    debug_assert!(dt > 0.0);
    let mut next = *state;
    match command {
        Some(Command::Trajectory(traj)) => {
            let k = traj.eval_clamped(command_time);
            next.position = k.position;
            next.velocity = k.velocity;
            next.acceleration = k.acceleration;
        }
        Some(Command::Steer { position, .. }) => {
            next.position = *position;
            next.velocity = nalgebra::zero();
            next.acceleration = nalgebra::zero();
        }
        None => {}
    }
    let max_turn = yaw_rate_limit * dt;
    let turn = angle_diff(yaw_setpoint, state.yaw).clamp(-max_turn, max_turn);
    next.yaw = normalize_angle(state.yaw + turn);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::trajectory::plan_to_rest;
    use approx::assert_relative_eq;

    #[test]
    fn tracks_to_endpoint() {
        let start = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let traj = plan_to_rest(&start, Vec3::new(2.0, 1.0, 0.5), 2.5).unwrap();
        let cmd = Command::Trajectory(traj);
        let dt = 0.01;
        let mut s = start;
        for i in 1..=250 {
            s = step_vehicle(&s, Some(&cmd), i as f64 * dt, 0.0, dt, DEFAULT_YAW_RATE_LIMIT);
        }
        assert_relative_eq!(s.position, Vec3::new(2.0, 1.0, 0.5), epsilon = 1e-9);
        assert!(s.speed() < 1e-9);
    }

    #[test]
    fn steer_holds_and_turns() {
        let hold = Vec3::new(1.0, 2.0, 3.0);
        let cmd = Command::Steer { position: hold, gamma: 1.0, yaw: 0.6 };
        let mut s = VehicleState::at_rest(hold, 0.0);
        for i in 1..=100 {
            s = step_vehicle(&s, Some(&cmd), i as f64 * 0.01, 0.6, 0.01, DEFAULT_YAW_RATE_LIMIT);
        }
        assert_eq!(s.position, hold);
        assert_relative_eq!(s.yaw, 0.6, epsilon = 1e-12);
    }

    #[test]
    fn yaw_rate_is_limited_and_wraps() {
        let s = VehicleState::at_rest(Vec3::zeros(), 3.1);
        let n = step_vehicle(&s, None, 0.0, -3.1, 0.01, 1.5);
        // shortest way is across ±π
        assert_relative_eq!(n.yaw, 3.1 + 0.015, epsilon = 1e-12);
        let n = step_vehicle(&VehicleState::at_rest(Vec3::zeros(), 0.0), None, 0.0, 1.0, 0.1, 1.5);
        assert_relative_eq!(n.yaw, 0.15, epsilon = 1e-12);
    }

    #[test]
    fn half_steps_compose() {
        let start = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let cmd = Command::Trajectory(plan_to_rest(&start, Vec3::new(1.0, -1.0, 0.0), 2.0).unwrap());
        let one = step_vehicle(&start, Some(&cmd), 0.5, 0.5, 0.5, 1.5);
        let half = step_vehicle(&start, Some(&cmd), 0.25, 0.5, 0.25, 1.5);
        let two = step_vehicle(&half, Some(&cmd), 0.5, 0.5, 0.25, 1.5);
        assert_relative_eq!(one.position, two.position, epsilon = 1e-12);
        assert_relative_eq!(one.yaw, two.yaw, epsilon = 1e-12);
    }
}
