//! Trajectory endpoint sampling.
//!
//! Endpoints are drawn in the camera's pixel × depth space: an integer pixel
//! uniformly over the image, then a depth uniformly over the reliable sensor
//! range `[l, u]`. The depth-based sampler additionally squeezes the depth
//! draw into `[l, d_xy]` whenever the observed depth `d_xy` at that pixel lies
//! inside `[l, u]`, so the endpoint can never land behind the visible surface.
//! Nothing is rejected at this stage; unsafe endpoints are left to the
//! collision checker.
//!
//! Both samplers consume the random stream identically (pixel x, pixel y,
//! depth), so runs with the same seed are paired draw for draw.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depth_image::DepthImage;
use crate::geometry::{deproject, CameraIntrinsics, Pose, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SamplingError {
    #[error("sample bounds must satisfy 0 < lower < upper (got {lower}, {upper})")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("depth sample {depth} outside [{lower}, {upper}]")]
    DomainError { depth: f64, lower: f64, upper: f64 },
}

/// Reliable depth range `[l, u]` in which endpoints are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct SampleBounds {
    lower: f64,
    upper: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    lower: f64,
    upper: f64,
}

impl TryFrom<RawBounds> for SampleBounds {
    type Error = SamplingError;
    fn try_from(raw: RawBounds) -> Result<Self, Self::Error> {
        SampleBounds::new(raw.lower, raw.upper)
    }
}

impl From<SampleBounds> for RawBounds {
    fn from(b: SampleBounds) -> Self {
        RawBounds {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl Default for SampleBounds {
    /// `l = 1 m`, `u = 3 m`.
    fn default() -> Self {
        Self {
            lower: 1.0,
            upper: 3.0,
        }
    }
}

impl SampleBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, SamplingError> {
        if lower > 0.0 && upper > lower && upper.is_finite() {
            Ok(Self { lower, upper })
        } else {
            Err(SamplingError::InvalidBounds { lower, upper })
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.lower && d <= self.upper
    }
}

/// A raw draw from the original sampling space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDepthSample {
    pub x: u32,
    pub y: u32,
    pub depth: f64,
}

/// A sampled trajectory endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub pixel_x: u32,
    pub pixel_y: u32,
    /// Depth actually used for the endpoint (`d_o` or `d_p`).
    pub depth: f64,
    pub endpoint_cam: Vec3,
    pub endpoint_world: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Uniform,
    DepthBased,
}

impl SamplerKind {
    pub fn label(&self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::DepthBased => "depth-based",
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        img: &DepthImage,
        k: &CameraIntrinsics,
        bounds: &SampleBounds,
        pose: &Pose,
    ) -> Candidate {
        match self {
            SamplerKind::Uniform => sample_uniform_candidate(rng, img, k, bounds, pose),
            SamplerKind::DepthBased => depth_based_sample(rng, img, k, bounds, pose),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

pub fn sample_uniform<R: Rng + ?Sized>(
    rng: &mut R,
    k: &CameraIntrinsics,
    bounds: &SampleBounds,
) -> PixelDepthSample {
    let x = rng.random_range(0..k.width);
    let y = rng.random_range(0..k.height);
    let depth = rng.random_range(bounds.lower..=bounds.upper);
    PixelDepthSample { x, y, depth }
}

/// Maps `d_o ∈ [l, u]` into `[l, d_xy]` when the observed depth `d_xy` is
/// inside `[l, u]`; otherwise (closer than `l`, beyond `u`, or no return)
/// passes `d_o` through unchanged.
pub fn constrain_depth(
    d_o: f64,
    d_xy: Option<f64>,
    bounds: &SampleBounds,
) -> Result<f64, SamplingError> {
    let (l, u) = (bounds.lower, bounds.upper);
    if !bounds.contains(d_o) {
        return Err(SamplingError::DomainError {
            depth: d_o,
            lower: l,
            upper: u,
        });
    }
    Ok(match d_xy {
        Some(d) if bounds.contains(d) => (d_o - l) * (d - l) / (u - l) + l,
        _ => d_o,
    })
}

fn to_candidate(
    x: u32,
    y: u32,
    depth: f64,
    k: &CameraIntrinsics,
    pose: &Pose,
) -> Candidate {
    let endpoint_cam = deproject(x as f64, y as f64, depth, k)
        .expect("sample bounds keep depth positive");
    Candidate {
        pixel_x: x,
        pixel_y: y,
        depth,
        endpoint_cam,
        endpoint_world: pose.camera_to_world(&endpoint_cam),
    }
}

/// Baseline: uniform draw over the full pixel × `[l, u]` space.
pub fn sample_uniform_candidate<R: Rng + ?Sized>(
    rng: &mut R,
    img: &DepthImage,
    k: &CameraIntrinsics,
    bounds: &SampleBounds,
    pose: &Pose,
) -> Candidate {
    debug_assert_eq!((img.width(), img.height()), (k.width, k.height));
    let s = sample_uniform(rng, k, bounds);
    to_candidate(s.x, s.y, s.depth, k, pose)
}

/// Depth-constrained draw. Never rejects.
pub fn depth_based_sample<R: Rng + ?Sized>(
    rng: &mut R,
    img: &DepthImage,
    k: &CameraIntrinsics,
    bounds: &SampleBounds,
    pose: &Pose,
) -> Candidate {
    debug_assert_eq!((img.width(), img.height()), (k.width, k.height));
    let s = sample_uniform(rng, k, bounds);
    let d_xy = img
        .query(s.x, s.y)
        .expect("image dimensions match the intrinsics");
    let d_p = constrain_depth(s.depth, d_xy, bounds).expect("uniform draw lies in bounds");
    to_candidate(s.x, s.y, d_p, k, pose)
}
