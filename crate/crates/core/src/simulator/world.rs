//! Ground-truth obstacle geometry.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Axis-aligned box, used for wall slabs and world bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.center).norm() - self.radius
    }

    /// Smallest positive `t` with `origin + t·dir` on the surface.
    pub fn ray_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let oc = origin - self.center;
        let a = dir.norm_squared();
        let half_b = oc.dot(dir);
        let c = oc.norm_squared() - self.radius * self.radius;
        let disc = half_b * half_b - a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let near = (-half_b - sq) / a;
        if near > 0.0 {
            return Some(near);
        }
        let far = (-half_b + sq) / a;
        (far > 0.0).then_some(far)
    }
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// Box given as `[x_min, x_max, y_min, y_max, z_min, z_max]`.
    pub fn from_extents(e: [f64; 6]) -> Self {
        Self {
            min: Vec3::new(e[0], e[2], e[4]),
            max: Vec3::new(e[1], e[3], e[5]),
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) / 2.0
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        let c = self.center();
        let half = self.size() / 2.0;
        let q = (p - c).abs() - half;
        let outside = q.map(|v| v.max(0.0)).norm();
        let inside = q.x.max(q.y).max(q.z).min(0.0);
        outside + inside
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// Slab-method ray intersection: smallest positive `t`.
    pub fn ray_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        for i in 0..3 {
            if dir[i] == 0.0 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let (mut t0, mut t1) = ((self.min[i] - origin[i]) * inv, (self.max[i] - origin[i]) * inv);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
            if t_enter > t_exit {
                return None;
            }
        }
        if t_enter > 0.0 {
            Some(t_enter)
        } else if t_exit > 0.0 {
            Some(t_exit)
        } else {
            None
        }
    }
}

/// Obstacles plus the region they were generated in.
///
/// Radii are not range-checked here: generated clutter keeps them in
/// `[0.05, 2.0]` but hand-built test worlds may use larger bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    #[serde(default)]
    pub spheres: Vec<Sphere>,
    #[serde(default)]
    pub slabs: Vec<Aabb>,
    pub bounds: Aabb,
}

impl World {
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            spheres: Vec::new(),
            slabs: Vec::new(),
            bounds,
        }
    }

    /// Distance to the nearest obstacle surface; negative inside an obstacle.
    /// `+∞` for an empty world.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        let s = self
            .spheres
            .iter()
            .map(|s| s.signed_distance(p))
            .fold(f64::INFINITY, f64::min);
        self.slabs
            .iter()
            .map(|b| b.signed_distance(p))
            .fold(s, f64::min)
    }

    pub fn is_occupied(&self, p: &Vec3) -> bool {
        self.signed_distance(p) < 0.0
    }

    pub fn ray_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let s = self
            .spheres
            .iter()
            .filter_map(|s| s.ray_hit(origin, dir))
            .fold(f64::INFINITY, f64::min);
        let t = self
            .slabs
            .iter()
            .filter_map(|b| b.ray_hit(origin, dir))
            .fold(s, f64::min);
        t.is_finite().then_some(t)
    }
}
