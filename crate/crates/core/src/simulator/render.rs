//! Analytic depth rendering by per-pixel ray casting.
//!
//! Each obstacle is only intersected against the pixels inside its projected
//! bounding rectangle, so cost scales with covered area rather than with
//! `pixels × obstacles`.

use crate::depth_image::{DepthImage, INVALID_DEPTH};
use crate::geometry::{project, CameraIntrinsics, Pose, Vec3};

use super::world::{Aabb, Sphere, World};

/// Near limit for the rectangle projection; bodies crossing it cover the
/// whole image.
const PLANE_EPS: f64 = 1e-3;

struct PixelRect {
    x0: u32,
    x1: u32,
    y0: u32,
    y1: u32,
}

fn full_rect(k: &CameraIntrinsics) -> PixelRect {
    PixelRect {
        x0: 0,
        x1: k.width - 1,
        y0: 0,
        y1: k.height - 1,
    }
}

/// Pixel rectangle covering the projection of camera-frame corner points.
/// `None` when everything lies behind the camera or off-image.
fn rect_from_corners(corners: &[Vec3], k: &CameraIntrinsics) -> Option<PixelRect> {
    if corners.iter().all(|c| c.z <= 0.0) {
        return None;
    }
    if corners.iter().any(|c| c.z <= PLANE_EPS) {
        return Some(full_rect(k));
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in corners {
        let p = project(c, k).ok()?;
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let clamp_x = |v: f64| v.clamp(0.0, (k.width - 1) as f64);
    let clamp_y = |v: f64| v.clamp(0.0, (k.height - 1) as f64);
    if xmax < -0.5 || ymax < -0.5 || xmin > k.width as f64 - 0.5 || ymin > k.height as f64 - 0.5 {
        return None;
    }
    Some(PixelRect {
        x0: clamp_x(xmin.floor()) as u32,
        x1: clamp_x(xmax.ceil()) as u32,
        y0: clamp_y(ymin.floor()) as u32,
        y1: clamp_y(ymax.ceil()) as u32,
    })
}

fn sphere_rect(s: &Sphere, pose: &Pose, k: &CameraIntrinsics, max_range: f64) -> Option<PixelRect> {
    let c = pose.world_to_camera(&s.center);
    if c.z + s.radius <= 0.0 || c.z - s.radius > max_range {
        return None;
    }
    let r = s.radius;
    let corners: Vec<Vec3> = [-r, r]
        .iter()
        .flat_map(|&dx| [-r, r].into_iter().flat_map(move |dy| [-r, r].into_iter().map(move |dz| Vec3::new(dx, dy, dz))))
        .map(|o| c + o)
        .collect();
    rect_from_corners(&corners, k)
}

fn slab_rect(b: &Aabb, pose: &Pose, k: &CameraIntrinsics) -> Option<PixelRect> {
    let corners: Vec<Vec3> = b.corners().iter().map(|p| pose.world_to_camera(p)).collect();
    rect_from_corners(&corners, k)
}

/// Renders the depth image seen from `pose`. Depth is the camera-frame `z`
/// of the nearest intersection; no hit or a hit beyond `max_range` is
/// stored as invalid.
pub fn render_depth(world: &World, pose: &Pose, k: &CameraIntrinsics, max_range: f64) -> DepthImage {
    let (w, h) = (k.width as usize, k.height as usize);
    let mut zbuf = vec![f64::INFINITY; w * h];
    let (right, down, forward) = pose.camera_axes();
    let origin = pose.position;
    // ray for pixel (x, y) with unit camera-z, so the hit parameter is depth
    let col_dir: Vec<Vec3> = (0..w)
        .map(|x| right * ((x as f64 - k.center_x) / k.focal_x) + forward)
        .collect();
    let row_dir: Vec<Vec3> = (0..h)
        .map(|y| down * ((y as f64 - k.center_y) / k.focal_y))
        .collect();

    let mut shade = |rect: PixelRect, hit: &dyn Fn(&Vec3) -> Option<f64>| {
        for y in rect.y0..=rect.y1 {
            let rd = row_dir[y as usize];
            let row = y as usize * w;
            for x in rect.x0..=rect.x1 {
                let dir = col_dir[x as usize] + rd;
                if let Some(t) = hit(&dir) {
                    let z = &mut zbuf[row + x as usize];
                    if t < *z {
                        *z = t;
                    }
                }
            }
        }
    };

    for s in &world.spheres {
        if let Some(rect) = sphere_rect(s, pose, k, max_range) {
            shade(rect, &|d| s.ray_hit(&origin, d));
        }
    }
    for b in &world.slabs {
        if let Some(rect) = slab_rect(b, pose, k) {
            shade(rect, &|d| b.ray_hit(&origin, d));
        }
    }

    let data = zbuf
        .into_iter()
        .map(|z| if z <= max_range { z as f32 } else { INVALID_DEPTH })
        .collect();
    DepthImage::new(k.width, k.height, data).expect("rendered depths are finite and positive")
}
