//! Minimum-jerk quintic trajectories that bring the vehicle to rest.
//!
//! Each axis is an independent quintic `p(t) = Σ cᵢ tⁱ` whose six
//! coefficients are fixed by the start position, velocity and acceleration
//! and by the endpoint with zero velocity and acceleration. With
//!
//! ```text
//! Δp = p_f - p0 - v0 T - a0 T²/2,   Δv = -v0 - a0 T,   Δa = -a0
//! ```
//!
//! the three free coefficients are
//!
//! ```text
//! c3 T³ = 10Δp - 4Δv T + Δa T²/2
//! c4 T⁴ = -15Δp + 7Δv T - Δa T²
//! c5 T⁵ = 6Δp - 3Δv T + Δa T²/2
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("time {t} outside [0, {duration}]")]
    OutOfDomain { t: f64, duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub yaw: f64,
}

impl VehicleState {
    pub fn at_rest(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
            yaw,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

/// Position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTrajectory {
    /// `coeffs[axis][i]` multiplies `tⁱ`.
    coeffs: [[f64; 6]; 3],
    duration: f64,
    start: VehicleState,
    endpoint: Vec3,
}

/// Unique quintic from `start` to rest at `endpoint` after `duration` seconds.
pub fn plan_to_rest(
    start: &VehicleState,
    endpoint: Vec3,
    duration: f64,
) -> Result<PolynomialTrajectory, TrajectoryError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(TrajectoryError::NonPositiveDuration(duration));
    }
    let t = duration;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let mut coeffs = [[0.0; 6]; 3];
    for (axis, c) in coeffs.iter_mut().enumerate() {
        let p0 = start.position[axis];
        let v0 = start.velocity[axis];
        let a0 = start.acceleration[axis];
        let dp = endpoint[axis] - p0 - v0 * t - 0.5 * a0 * t2;
        let dv = -v0 - a0 * t;
        let da = -a0;
        *c = [
            p0,
            v0,
            0.5 * a0,
            (10.0 * dp - 4.0 * dv * t + 0.5 * da * t2) / t3,
            (-15.0 * dp + 7.0 * dv * t - da * t2) / t4,
            (6.0 * dp - 3.0 * dv * t + 0.5 * da * t2) / t5,
        ];
    }
    Ok(PolynomialTrajectory {
        coeffs,
        duration,
        start: *start,
        endpoint,
    })
}

impl PolynomialTrajectory {
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start(&self) -> &VehicleState {
        &self.start
    }

    pub fn endpoint(&self) -> Vec3 {
        self.endpoint
    }

    pub fn coefficients(&self) -> &[[f64; 6]; 3] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> Result<Kinematics, TrajectoryError> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(TrajectoryError::OutOfDomain {
                t,
                duration: self.duration,
            });
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluates with `t` clamped to `[0, T]`; past the end the vehicle rests
    /// at the endpoint.
    pub fn eval_clamped(&self, t: f64) -> Kinematics {
        self.eval_unchecked(t.clamp(0.0, self.duration))
    }

    pub fn position(&self, t: f64) -> Vec3 {
        let t = t.clamp(0.0, self.duration);
        let mut p = Vec3::zeros();
        for (axis, c) in self.coeffs.iter().enumerate() {
            p[axis] = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        }
        p
    }

    fn eval_unchecked(&self, t: f64) -> Kinematics {
        let mut k = Kinematics {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
        };
        for (axis, c) in self.coeffs.iter().enumerate() {
            k.position[axis] =
                c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
            k.velocity[axis] =
                c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
            k.acceleration[axis] =
                2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        }
        k
    }

    /// Largest speed over samples spaced `T/100` apart.
    pub fn peak_speed(&self) -> f64 {
        (0..=100)
            .map(|i| self.eval_unchecked(self.duration * i as f64 / 100.0).velocity.norm())
            .fold(0.0, f64::max)
    }
}

pub fn peak_speed(traj: &PolynomialTrajectory) -> f64 {
    traj.peak_speed()
}

/// Clamp range for distance-derived trajectory durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationLimits {
    pub min: f64,
    pub max: f64,
}

impl Default for DurationLimits {
    fn default() -> Self {
        Self { min: 1.0, max: 5.0 }
    }
}

/// `‖endpoint - start‖ / v_des`, clamped to the limits.
pub fn duration_for(
    endpoint: &Vec3,
    start: &VehicleState,
    v_des: f64,
    limits: &DurationLimits,
) -> f64 {
    debug_assert!(v_des > 0.0);
    ((endpoint - start.position).norm() / v_des).clamp(limits.min, limits.max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{SMatrix, SVector};
    use proptest::prelude::*;

    /// Solves the 6×6 boundary-value system directly, independent of the
    /// closed form.
    fn solve_boundary_system(p0: f64, v0: f64, a0: f64, pf: f64, t: f64) -> [f64; 6] {
        let mut m = SMatrix::<f64, 6, 6>::zeros();
        let row_p = |t: f64| [1.0, t, t * t, t.powi(3), t.powi(4), t.powi(5)];
        let row_v = |t: f64| [0.0, 1.0, 2.0 * t, 3.0 * t * t, 4.0 * t.powi(3), 5.0 * t.powi(4)];
        let row_a = |t: f64| [0.0, 0.0, 2.0, 6.0 * t, 12.0 * t * t, 20.0 * t.powi(3)];
        let rows = [row_p(0.0), row_v(0.0), row_a(0.0), row_p(t), row_v(t), row_a(t)];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        let rhs = SVector::<f64, 6>::from([p0, v0, a0, pf, 0.0, 0.0]);
        let c = m.lu().solve(&rhs).unwrap();
        [c[0], c[1], c[2], c[3], c[4], c[5]]
    }

    #[test]
    fn closed_form_matches_linear_solve() {
        let start = VehicleState {
            position: Vec3::new(0.3, -1.0, 2.0),
            velocity: Vec3::new(0.8, 0.1, -0.4),
            acceleration: Vec3::new(-0.2, 0.5, 0.3),
            yaw: 0.0,
        };
        let end = Vec3::new(2.5, 0.4, 1.1);
        let traj = plan_to_rest(&start, end, 2.3).unwrap();
        for axis in 0..3 {
            let expect = solve_boundary_system(
                start.position[axis],
                start.velocity[axis],
                start.acceleration[axis],
                end[axis],
                2.3,
            );
            for (got, want) in traj.coefficients()[axis].iter().zip(expect) {
                assert_relative_eq!(*got, want, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rest_to_rest_is_minimum_jerk_profile() {
        let p0 = Vec3::new(1.0, 2.0, 3.0);
        let pf = Vec3::new(4.0, -2.0, 5.0);
        let traj = plan_to_rest(&VehicleState::at_rest(p0, 0.0), pf, 2.0).unwrap();
        for i in 0..=20 {
            let t = 2.0 * i as f64 / 20.0;
            let s = t / 2.0;
            let shape = 10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5);
            assert_relative_eq!(traj.eval(t).unwrap().position, p0 + (pf - p0) * shape, epsilon = 1e-12);
        }
        assert_relative_eq!(traj.eval(1.0).unwrap().position, (p0 + pf) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_displacement_is_constant() {
        let p = Vec3::new(1.0, 1.0, 1.0);
        let traj = plan_to_rest(&VehicleState::at_rest(p, 0.0), p, 1.5).unwrap();
        for i in 0..=10 {
            let k = traj.eval(0.15 * i as f64).unwrap();
            assert_eq!(k.position, p);
            assert_eq!(k.velocity, Vec3::zeros());
        }
        assert_eq!(traj.peak_speed(), 0.0);
    }

    #[test]
    fn non_positive_duration_rejected() {
        let s = VehicleState::at_rest(Vec3::zeros(), 0.0);
        assert!(matches!(
            plan_to_rest(&s, Vec3::x(), 0.0),
            Err(TrajectoryError::NonPositiveDuration(_))
        ));
        assert!(plan_to_rest(&s, Vec3::x(), -1.0).is_err());
        assert!(plan_to_rest(&s, Vec3::x(), f64::NAN).is_err());
    }

    #[test]
    fn eval_outside_domain() {
        let traj = plan_to_rest(&VehicleState::at_rest(Vec3::zeros(), 0.0), Vec3::x(), 1.0).unwrap();
        assert!(matches!(traj.eval(-0.01), Err(TrajectoryError::OutOfDomain { .. })));
        assert!(traj.eval(1.01).is_err());
        assert_eq!(traj.eval_clamped(7.0).position, Vec3::x());
    }

    #[test]
    fn rest_to_rest_peak_speed() {
        // d/ds (10s³ - 15s⁴ + 6s⁵) = 30s²(1-s)², maximal at s = 1/2 with value 15/8
        let traj = plan_to_rest(
            &VehicleState::at_rest(Vec3::zeros(), 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            2.0,
        )
        .unwrap();
        let mid = traj.eval(1.0).unwrap().velocity.norm();
        assert_relative_eq!(mid, 1.875, epsilon = 1e-12);
        let sampled = traj.peak_speed();
        assert!((sampled - 1.875).abs() / 1.875 < 0.01);
    }

    #[test]
    fn peak_speed_scales_linearly() {
        let s = VehicleState::at_rest(Vec3::new(0.5, 0.5, 0.5), 0.0);
        let dir = Vec3::new(1.0, -2.0, 0.5);
        let base = plan_to_rest(&s, s.position + dir, 2.0).unwrap().peak_speed();
        for k in [0.5, 2.0, 3.7] {
            let scaled = plan_to_rest(&s, s.position + dir * k, 2.0).unwrap().peak_speed();
            assert_relative_eq!(scaled, base * k, epsilon = 1e-9);
        }
    }

    #[test]
    fn durations() {
        let s = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let lim = DurationLimits::default();
        assert_eq!(duration_for(&Vec3::new(2.0, 0.0, 0.0), &s, 1.0, &lim), 2.0);
        assert_eq!(duration_for(&Vec3::zeros(), &s, 1.0, &lim), 1.0);
        assert_eq!(duration_for(&Vec3::new(10.0, 0.0, 0.0), &s, 1.0, &lim), 5.0);
    }

    #[test]
    fn rest_start_follows_straight_segment() {
        let p0 = Vec3::new(-1.0, 0.0, 2.0);
        let pf = Vec3::new(1.0, 3.0, 0.0);
        let traj = plan_to_rest(&VehicleState::at_rest(p0, 0.0), pf, 3.0).unwrap();
        let dir = (pf - p0).normalize();
        for i in 0..=30 {
            let p = traj.eval(0.1 * i as f64).unwrap().position - p0;
            assert!((p - dir * p.dot(&dir)).norm() < 1e-12);
        }
    }

    fn arb_state() -> impl Strategy<Value = VehicleState> {
        let v = || (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y, z)| Vec3::new(x, y, z));
        (v(), v(), v()).prop_map(|(p, v, a)| VehicleState {
            position: p * 3.0,
            velocity: v,
            acceleration: a,
            yaw: 0.0,
        })
    }

    proptest! {
        #[test]
        fn boundary_residuals(start in arb_state(), ex in -5.0f64..5.0, ey in -5.0f64..5.0,
                              ez in -5.0f64..5.0, t in 0.5f64..5.0) {
            let end = Vec3::new(ex, ey, ez);
            let traj = plan_to_rest(&start, end, t).unwrap();
            let k0 = traj.eval(0.0).unwrap();
            let kt = traj.eval(t).unwrap();
            prop_assert!((k0.position - start.position).norm() < 1e-9);
            prop_assert!((k0.velocity - start.velocity).norm() < 1e-9);
            prop_assert!((k0.acceleration - start.acceleration).norm() < 1e-9);
            prop_assert!((kt.position - end).norm() < 1e-9);
            prop_assert!(kt.velocity.norm() < 1e-9);
            prop_assert!(kt.acceleration.norm() < 1e-9);
        }

        #[test]
        fn velocity_matches_finite_difference(start in arb_state(), ex in -5.0f64..5.0,
                                              t in 0.5f64..5.0, frac in 0.01f64..0.99) {
            let traj = plan_to_rest(&start, Vec3::new(ex, 1.0, -1.0), t).unwrap();
            let h = 1e-4 * t;
            let tc = frac * t;
            let tc = tc.clamp(h, t - h);
            let fd = (traj.eval(tc + h).unwrap().position - traj.eval(tc - h).unwrap().position) / (2.0 * h);
            let v = traj.eval(tc).unwrap().velocity;
            let scale = v.norm().max(1.0);
            prop_assert!((fd - v).norm() / scale < 1e-5);
        }

        #[test]
        fn axes_are_decoupled(start in arb_state(), ex in -5.0f64..5.0, ey in -5.0f64..5.0, t in 0.5f64..5.0) {
            let a = plan_to_rest(&start, Vec3::new(ex, ey, 0.0), t).unwrap();
            let mut other = start;
            other.position.y += 1.0;
            other.velocity.z -= 0.5;
            let b = plan_to_rest(&other, Vec3::new(ex, ey + 7.0, 2.0), t).unwrap();
            prop_assert_eq!(a.coefficients()[0], b.coefficients()[0]);
        }
    }
}
