//! Frames, the pinhole camera model and pixel/point conversions.
//!
//! Two frames are used throughout the crate:
//!
//! * **World**: `x`, `y` parallel to the ground, `z` up.
//! * **Camera**: `x` right, `y` down, `z` forward along the optical axis.
//!
//! The camera is rigidly mounted on the vehicle and only yaws with it. For a
//! vehicle yaw `ψ` the camera axes expressed in the world frame are
//!
//! ```text
//! z_cam = ( cos ψ,  sin ψ,  0)   heading
//! x_cam = ( sin ψ, -cos ψ,  0)   heading rotated -90° about world z
//! y_cam = ( 0,      0,     -1)   down
//! ```
//!
//! which is right-handed (`x_cam × y_cam = z_cam`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Three-component vector in meters. The frame depends on context.
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("point depth {0} is not in front of the camera")]
    NonPositiveDepth(f64),
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Signed shortest rotation taking `from` to `to`, in `(-π, π]`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub width: u32,
    pub height: u32,
    pub focal_x: f64,
    pub focal_y: f64,
    pub center_x: f64,
    pub center_y: f64,
}

impl Default for CameraIntrinsics {
    /// 320×240 with a 90° horizontal field of view.
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            focal_x: 160.0,
            focal_y: 160.0,
            center_x: 160.0,
            center_y: 120.0,
        }
    }
}

impl CameraIntrinsics {
    pub fn new(
        width: u32,
        height: u32,
        focal_x: f64,
        focal_y: f64,
        center_x: f64,
        center_y: f64,
    ) -> Result<Self, GeometryError> {
        let k = Self {
            width,
            height,
            focal_x,
            focal_y,
            center_x,
            center_y,
        };
        k.validate()?;
        Ok(k)
    }

    /// Square pixels, principal point at `(w/2, h/2)`.
    pub fn from_fov(width: u32, height: u32, horizontal_fov: f64) -> Result<Self, GeometryError> {
        if !(horizontal_fov > 0.0 && horizontal_fov < PI) {
            return Err(GeometryError::InvalidIntrinsics("field of view must be in (0, π)"));
        }
        let f = width as f64 / 2.0 / (horizontal_fov / 2.0).tan();
        Self::new(width, height, f, f, width as f64 / 2.0, height as f64 / 2.0)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics("image size must be positive"));
        }
        if !(self.focal_x > 0.0 && self.focal_y > 0.0) {
            return Err(GeometryError::InvalidIntrinsics("focal lengths must be positive"));
        }
        let inside = |c: f64, n: u32| c.is_finite() && c >= 0.0 && c <= n as f64;
        if !inside(self.center_x, self.width) || !inside(self.center_y, self.height) {
            return Err(GeometryError::InvalidIntrinsics("principal point outside image"));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Nearest integer pixel for a continuous image coordinate, if it falls
    /// on the sensor.
    pub fn pixel_index(&self, pixel_x: f64, pixel_y: f64) -> Option<(u32, u32)> {
        let x = pixel_x.round();
        let y = pixel_y.round();
        if x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64 {
            Some((x as u32, y as u32))
        } else {
            None
        }
    }
}

/// A point seen by the camera: continuous pixel coordinates plus depth along
/// the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

pub fn project(point_cam: &Vec3, k: &CameraIntrinsics) -> Result<ImagePoint, GeometryError> {
    let z = point_cam.z;
    if !(z > 0.0) {
        return Err(GeometryError::NonPositiveDepth(z));
    }
    Ok(ImagePoint {
        x: k.center_x + k.focal_x * point_cam.x / z,
        y: k.center_y + k.focal_y * point_cam.y / z,
        depth: z,
    })
}

pub fn deproject(
    pixel_x: f64,
    pixel_y: f64,
    depth: f64,
    k: &CameraIntrinsics,
) -> Result<Vec3, GeometryError> {
    if !(depth > 0.0) {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    Ok(Vec3::new(
        (pixel_x - k.center_x) * depth / k.focal_x,
        (pixel_y - k.center_y) * depth / k.focal_y,
        depth,
    ))
}

/// Vehicle (and camera) pose: world position plus yaw about world `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            yaw: normalize_angle(yaw),
        }
    }

    /// Camera axes `(right, down, forward)` in world coordinates.
    pub fn camera_axes(&self) -> (Vec3, Vec3, Vec3) {
        let (s, c) = self.yaw.sin_cos();
        (Vec3::new(s, -c, 0.0), Vec3::new(0.0, 0.0, -1.0), Vec3::new(c, s, 0.0))
    }

    pub fn world_to_camera(&self, point_world: &Vec3) -> Vec3 {
        let d = point_world - self.position;
        let (right, down, forward) = self.camera_axes();
        Vec3::new(d.dot(&right), d.dot(&down), d.dot(&forward))
    }

    pub fn camera_to_world(&self, point_cam: &Vec3) -> Vec3 {
        self.direction_to_world(point_cam) + self.position
    }

    /// Rotates a camera-frame direction into the world frame (no translation).
    pub fn direction_to_world(&self, dir_cam: &Vec3) -> Vec3 {
        let (right, down, forward) = self.camera_axes();
        right * dir_cam.x + down * dir_cam.y + forward * dir_cam.z
    }
}

pub fn world_to_camera(pose: &Pose, point_world: &Vec3) -> Vec3 {
    pose.world_to_camera(point_world)
}

pub fn camera_to_world(pose: &Pose, point_cam: &Vec3) -> Vec3 {
    pose.camera_to_world(point_cam)
}

/// Bearing of a world-frame vector in the ground plane.
pub fn bearing(v: &Vec3) -> f64 {
    v.y.atan2(v.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn optical_axis_projects_to_principal_point() {
        let k = CameraIntrinsics::default();
        let p = project(&Vec3::new(0.0, 0.0, 2.0), &k).unwrap();
        assert_eq!((p.x, p.y, p.depth), (160.0, 120.0, 2.0));
    }

    #[test]
    fn project_hand_evaluated() {
        let k = CameraIntrinsics::default();
        let p = project(&Vec3::new(1.0, 0.0, 1.0), &k).unwrap();
        assert_eq!(p.x, 320.0);
        assert_eq!(p.y, 120.0);
    }

    #[test]
    fn behind_camera_is_rejected() {
        let k = CameraIntrinsics::default();
        assert!(matches!(
            project(&Vec3::new(0.0, 0.0, -1.0), &k),
            Err(GeometryError::NonPositiveDepth(_))
        ));
        assert!(project(&Vec3::new(1.0, 1.0, 0.0), &k).is_err());
        assert!(deproject(10.0, 10.0, 0.0, &k).is_err());
    }

    #[test]
    fn deproject_hand_evaluated() {
        let k = CameraIntrinsics::default();
        assert_eq!(deproject(160.0, 120.0, 3.0, &k).unwrap(), Vec3::new(0.0, 0.0, 3.0));
        assert_eq!(deproject(320.0, 120.0, 1.0, &k).unwrap(), Vec3::new(1.0, 0.0, 1.0));
    }

    #[test]
    fn default_intrinsics_match_ninety_degree_fov() {
        let k = CameraIntrinsics::from_fov(320, 240, PI / 2.0).unwrap();
        assert_relative_eq!(k.focal_x, 160.0, epsilon = 1e-9);
        assert_relative_eq!(k.center_y, 120.0);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0, 10, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(10, 10, -1.0, 1.0, 5.0, 5.0).is_err());
        assert!(CameraIntrinsics::new(10, 10, 1.0, 1.0, 11.0, 5.0).is_err());
        assert!(CameraIntrinsics::default().validate().is_ok());
    }

    #[test]
    fn pixel_index_rounds_and_bounds() {
        let k = CameraIntrinsics::default();
        assert_eq!(k.pixel_index(10.4, 3.6), Some((10, 4)));
        assert_eq!(k.pixel_index(-0.4, 0.0), Some((0, 0)));
        assert_eq!(k.pixel_index(-0.6, 0.0), None);
        assert_eq!(k.pixel_index(319.49, 239.0), Some((319, 239)));
        assert_eq!(k.pixel_index(319.5, 0.0), None);
    }

    #[test]
    fn axis_mapping_at_zero_yaw() {
        let pose = Pose::new(Vec3::zeros(), 0.0);
        assert_relative_eq!(pose.world_to_camera(&Vec3::new(1.0, 0.0, 0.0)), Vec3::new(0.0, 0.0, 1.0));
        // world +z is up, camera +y is down
        assert_relative_eq!(pose.world_to_camera(&Vec3::new(0.0, 0.0, 1.0)), Vec3::new(0.0, -1.0, 0.0));
        // world -y is to the right when facing +x
        assert_relative_eq!(pose.world_to_camera(&Vec3::new(0.0, -1.0, 0.0)), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn axis_mapping_at_quarter_turn() {
        let pose = Pose::new(Vec3::zeros(), PI / 2.0);
        let q = pose.world_to_camera(&Vec3::new(0.0, 1.0, 0.0));
        assert_relative_eq!(q, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn point_ahead_maps_to_optical_axis() {
        let pose = Pose::new(Vec3::new(2.0, -1.0, 3.0), 0.7);
        let (_, _, fwd) = pose.camera_axes();
        let q = pose.world_to_camera(&(pose.position + fwd * 4.5));
        assert_relative_eq!(q, Vec3::new(0.0, 0.0, 4.5), epsilon = 1e-12);
    }

    #[test]
    fn camera_axes_are_right_handed() {
        let (x, y, z) = Pose::new(Vec3::zeros(), 1.234).camera_axes();
        assert_relative_eq!(x.cross(&y), z, epsilon = 1e-12);
    }

    #[test]
    fn normalize_angle_range() {
        assert_relative_eq!(normalize_angle(PI), PI);
        assert_relative_eq!(normalize_angle(-PI), PI);
        assert_relative_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(angle_diff(-3.0, 3.0), 2.0 * PI - 6.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn project_deproject_round_trip(
            px in 0.0f64..320.0, py in 0.0f64..240.0, d in 0.05f64..50.0
        ) {
            let k = CameraIntrinsics::default();
            let p = deproject(px, py, d, &k).unwrap();
            let back = project(&p, &k).unwrap();
            prop_assert!((back.x - px).abs() <= 1e-9 * px.abs().max(1.0));
            prop_assert!((back.y - py).abs() <= 1e-9 * py.abs().max(1.0));
            prop_assert!((back.depth - d).abs() <= 1e-9 * d);
        }

        #[test]
        fn frame_change_round_trip(
            x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0,
            ox in -20.0f64..20.0, oy in -20.0f64..20.0, oz in -5.0f64..15.0,
            yaw in -4.0f64..4.0,
        ) {
            let pose = Pose::new(Vec3::new(ox, oy, oz), yaw);
            let p = Vec3::new(x, y, z);
            let back = pose.camera_to_world(&pose.world_to_camera(&p));
            prop_assert!((back - p).norm() < 1e-9);
            let q = pose.world_to_camera(&pose.camera_to_world(&p));
            prop_assert!((q - p).norm() < 1e-9);
        }

        #[test]
        fn normalized_angle_in_half_open_interval(a in -100.0f64..100.0) {
            let n = normalize_angle(a);
            prop_assert!(n > -PI && n <= PI);
            prop_assert!(((a - n) / (2.0 * PI)).fract().abs() < 1e-9
                || (1.0 - ((a - n) / (2.0 * PI)).fract().abs()) < 1e-9);
        }
    }
}
