//! Conservative trajectory checking against a single depth frame, and the
//! ground-truth trajectory classifier used as a test oracle.
//!
//! The checker samples the trajectory in time (at most `step` seconds and
//! `radius / 2` meters apart, always including `T`). A sample `q` (camera
//! frame) is safe when
//!
//! * it is within `start_free_radius` of the trajectory start, or
//! * `q.z >= z_near`, the footprint ball is in view, and no pixel ray that
//!   meets the footprint ball around `q` has its return before the ray
//!   leaves the ball. The space behind a return is unknown, so such a pixel
//!   means the ball may overlap an obstacle. The footprint ball has the
//!   vehicle radius plus one pixel at depth `q.z`.
//!
//! "In view" means the whole ball projects inside the image once `q` is
//! `full_view_distance` or more from the camera. Nearer samples only need
//! `q` itself in view, and their footprint is clipped to the image. A ball
//! reaching the camera plane covers every pixel.
//!
//! Pixels without a return count as free space. Samples out of view or too
//! close to the camera plane are unknown and therefore unsafe.
//!
//! Footprints are evaluated row by row with a sparse-table range
//! minimum built once per frame: rows whose nearest return is beyond the
//! ball's far side are cleared in `O(1)`, and only the others are scanned. `pixels_touched` still reports the number
//! of depth pixels the footprints covered.

use serde::{Deserialize, Serialize};

use crate::depth_image::{DepthImage, INVALID_DEPTH};
use crate::geometry::{CameraIntrinsics, Pose, Vec3};
use crate::simulator::World;
use crate::trajectory::PolynomialTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionConfig {
    /// Inflation radius of the vehicle, meters.
    pub radius: f64,
    /// Time step between samples, seconds.
    pub step: f64,
    pub z_near: f64,
    pub start_free_radius: f64,
    /// Samples at least this far from the camera need their whole
    /// footprint ball in view; nearer ones are clipped to the image.
    pub full_view_distance: f64,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        Self {
            radius: 0.3,
            step: 0.02,
            z_near: 0.1,
            start_free_radius: 0.2,
            full_view_distance: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionVerdict {
    Free,
    /// First sampled time at which the trajectory is not known to be safe.
    Collision { time: f64 },
}

impl CollisionVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, CollisionVerdict::Free)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport {
    pub verdict: CollisionVerdict,
    pub pixels_touched: u64,
}

/// Trajectory categories by their relation to occupied space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrajectoryClass {
    /// Whole path keeps at least one radius of clearance.
    Free = 0,
    /// Path stays outside obstacles but comes within one radius of a surface.
    TooClose = 1,
    /// Path passes through an obstacle; endpoint outside.
    PassesThrough = 2,
    /// Endpoint inside an obstacle.
    EndpointInside = 3,
}

impl TrajectoryClass {
    pub fn index(&self) -> usize {
        *self as usize
    }
}

/// Sparse table of minima along rows.
#[derive(Debug, Clone)]
struct RowTable {
    width: usize,
    levels: Vec<Vec<f32>>,
}

impl RowTable {
    fn new(width: usize, height: usize, base: Vec<f32>) -> Self {
        let mut levels = vec![base];
        let mut span = 1usize;
        while span * 2 <= width {
            let prev = levels.last().unwrap();
            let mut next = vec![f32::INFINITY; width * height];
            for y in 0..height {
                let row = y * width;
                for x in 0..=width - 2 * span {
                    next[row + x] = prev[row + x].min(prev[row + x + span]);
                }
            }
            levels.push(next);
            span *= 2;
        }
        Self { width, levels }
    }

    fn min(&self, y: usize, x0: usize, x1: usize) -> f32 {
        let len = x1 - x0 + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let level = &self.levels[k];
        let row = y * self.width;
        level[row + x0].min(level[row + x1 + 1 - (1 << k)])
    }
}

/// Rows per band of the coarse table.
const BAND: usize = 8;

/// Range-minimum index over a depth image: per row, and per band of
/// [`BAND`] rows. Invalid pixels hold `+∞`.
#[derive(Debug, Clone)]
pub struct DepthIndex {
    width: usize,
    height: usize,
    rows: RowTable,
    bands: RowTable,
}

impl DepthIndex {
    pub fn new(img: &DepthImage) -> Self {
        let width = img.width() as usize;
        let height = img.height() as usize;
        let base: Vec<f32> = img
            .data()
            .iter()
            .map(|&v| if v == INVALID_DEPTH { f32::INFINITY } else { v })
            .collect();
        let n_bands = height.div_ceil(BAND);
        let mut band_base = vec![f32::INFINITY; width * n_bands];
        for (y, row) in base.chunks_exact(width).enumerate() {
            let band = &mut band_base[(y / BAND) * width..][..width];
            for (b, &v) in band.iter_mut().zip(row) {
                *b = b.min(v);
            }
        }
        Self {
            width,
            height,
            rows: RowTable::new(width, height, base),
            bands: RowTable::new(width, n_bands, band_base),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Depth at a pixel, `+∞` without a return.
    pub fn depth(&self, x: usize, y: usize) -> f32 {
        self.rows.levels[0][y * self.width + x]
    }

    /// Minimum over `x0..=x1` in row `y`.
    pub fn row_min(&self, y: usize, x0: usize, x1: usize) -> f32 {
        debug_assert!(x0 <= x1 && x1 < self.width && y < self.height);
        self.rows.min(y, x0, x1)
    }

    /// Minimum over `x0..=x1` in the rows of band `y / BAND`.
    fn band_min(&self, y: usize, x0: usize, x1: usize) -> f32 {
        self.bands.min(y / BAND, x0, x1)
    }
}

/// How a footprint ball sits relative to the sensor's field of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Placement {
    /// The ball is in front of the camera plane and in view (wholly, or
    /// just its center when clipping is allowed).
    Inside,
    /// The ball reaches the camera plane; every pixel is in the footprint.
    ReachesCameraPlane,
    /// The ball is not sufficiently in view.
    Outside,
}

pub(crate) fn placement(q: &Vec3, radius: f64, k: &CameraIntrinsics, full_view: bool) -> Placement {
    if q.z <= radius {
        return Placement::ReachesCameraPlane;
    }
    let inside = if full_view {
        // slopes of the tangent planes through the camera's y and x axes
        let a = q.z * q.z - radius * radius;
        let sx = radius * (q.x * q.x + a).sqrt();
        let sy = radius * (q.y * q.y + a).sqrt();
        let (x_lo, x_hi) = ((q.x * q.z - sx) / a, (q.x * q.z + sx) / a);
        let (y_lo, y_hi) = ((q.y * q.z - sy) / a, (q.y * q.z + sy) / a);
        k.focal_x * x_lo + k.center_x >= -0.5
            && k.focal_x * x_hi + k.center_x <= k.width as f64 - 0.5
            && k.focal_y * y_lo + k.center_y >= -0.5
            && k.focal_y * y_hi + k.center_y <= k.height as f64 - 0.5
    } else {
        let u = k.focal_x * q.x / q.z + k.center_x;
        let v = k.focal_y * q.y / q.z + k.center_y;
        (-0.5..=k.width as f64 - 0.5).contains(&u) && (-0.5..=k.height as f64 - 0.5).contains(&v)
    };
    if inside {
        Placement::Inside
    } else {
        Placement::Outside
    }
}

/// Pixels whose center rays pass within `radius` of the camera-frame point
/// `q`, as inclusive `(y, x0, x1)` spans clipped to the image. A ball that
/// reaches the camera plane covers the whole image.
pub(crate) fn footprint_rows(
    q: &Vec3,
    radius: f64,
    k: &CameraIntrinsics,
) -> impl Iterator<Item = (usize, usize, usize)> {
    let q = *q;
    let (w, h) = (k.width as i64, k.height as i64);
    let (fx, fy, cx, cy) = (k.focal_x, k.focal_y, k.center_x, k.center_y);
    let r2 = radius * radius;
    let full = q.z <= radius;
    // rows: planes through the x-axis at slope b = y/z touching the ball
    let (y0, y1) = if full {
        (0, h - 1)
    } else {
        let a = q.z * q.z - r2;
        let s = radius * (q.y * q.y + q.z * q.z - r2).sqrt();
        let b_lo = (q.y * q.z - s) / a;
        let b_hi = (q.y * q.z + s) / a;
        (((fy * b_lo + cy).ceil() as i64).max(0), ((fy * b_hi + cy).floor() as i64).min(h - 1))
    };
    let k_sq = q.norm_squared() - r2;
    let lead = r2 - q.y * q.y - q.z * q.z;
    (y0..=y1).filter_map(move |y| {
        if full {
            return Some((y as usize, 0, (w - 1) as usize));
        }
        // ray (a, b, 1) meets the ball iff (q·u)² >= (|q|² - r²)|u|²,
        // a downward quadratic in a
        let b = (y as f64 - cy) / fy;
        let c = q.y * b + q.z;
        let disc = q.x * q.x * c * c - lead * (c * c - k_sq * (1.0 + b * b));
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let (a0, a1) = ((-q.x * c + sq) / lead, (-q.x * c - sq) / lead);
        let x0 = ((fx * a0.min(a1) + cx).ceil() as i64).max(0);
        let x1 = ((fx * a0.max(a1) + cx).floor() as i64).min(w - 1);
        (x0 <= x1).then_some((y as usize, x0 as usize, x1 as usize))
    })
}

/// Depth at which the ray `z·(a, b, 1)` leaves the ball of `radius` around
/// `q`, if it meets the ball.
fn exit_depth(a: f64, b: f64, q: &Vec3, radius: f64) -> Option<f64> {
    let v = Vec3::new(a, b, 1.0);
    let vv = v.norm_squared();
    let vq = v.dot(q);
    let disc = vq * vq - vv * (q.norm_squared() - radius * radius);
    (disc >= 0.0).then(|| (vq + disc.sqrt()) / vv)
}

/// Whether the space hidden behind a return at depth `d` on pixel `(x, y)`
/// overlaps the ball of `radius` around `q`.
pub(crate) fn occluded_in_ball(x: usize, y: usize, d: f32, q: &Vec3, radius: f64, k: &CameraIntrinsics) -> bool {
    d.is_finite()
        && exit_depth((x as f64 - k.center_x) / k.focal_x, (y as f64 - k.center_y) / k.focal_y, q, radius)
            .is_some_and(|z| (d as f64) < z)
}

/// Upper bound on exit depths over pixel spans of one row. In the row's
/// plane the ball is a disk; over a wedge of rays the deepest point is the
/// disk's deepest point if its ray lies in the wedge, else the exit point
/// of a boundary ray.
struct RowBound {
    b: f64,
    inv_fx: f64,
    deepest: Option<(f64, f64)>,
}

impl RowBound {
    fn new(y: usize, q: &Vec3, radius: f64, k: &CameraIntrinsics) -> Self {
        let b = (y as f64 - k.center_y) / k.focal_y;
        let n = (1.0 + b * b).sqrt();
        let off_plane = (q.y - b * q.z) / n;
        let rho2 = radius * radius - off_plane * off_plane;
        let c_t = (b * q.y + q.z) / n;
        let deepest = (rho2 >= 0.0).then(|| c_t + rho2.sqrt()).filter(|&t| t > 0.0).map(|t| (q.x * n / t, t / n));
        Self {
            b,
            inv_fx: 1.0 / k.focal_x,
            deepest,
        }
    }

    /// Deepest point of the ball in this row's plane.
    fn deepest_depth(&self) -> f64 {
        self.deepest.map_or(f64::NEG_INFINITY, |(_, z)| z)
    }

    fn max_exit(&self, x0: usize, x1: usize, q: &Vec3, radius: f64, k: &CameraIntrinsics) -> f64 {
        let a0 = (x0 as f64 - k.center_x) * self.inv_fx;
        let a1 = (x1 as f64 - k.center_x) * self.inv_fx;
        if let Some((a_star, z)) = self.deepest {
            if (a0..=a1).contains(&a_star) {
                return z;
            }
        }
        let e = |a| exit_depth(a, self.b, q, radius).unwrap_or(f64::NEG_INFINITY);
        e(a0).max(e(a1))
    }
}

/// Upper bound on exit depths over rows `y0..=y1`, by the same argument as
/// [`RowBound`] across rows.
fn band_max_exit(y0: usize, y1: usize, q: &Vec3, radius: f64, k: &CameraIntrinsics) -> f64 {
    let y_star = k.focal_y * q.y / (q.z + radius) + k.center_y;
    if (y0 as f64..=y1 as f64).contains(&y_star) {
        return q.z + radius;
    }
    RowBound::new(y0, q, radius, k).deepest_depth().max(RowBound::new(y1, q, radius, k).deepest_depth())
}

/// Whether any pixel of `y, x0..=x1` hides space inside the ball. Spans are
/// bisected and cleared with the range minimum where possible.
fn span_violates(index: &DepthIndex, y: usize, x0: usize, x1: usize, q: &Vec3, radius: f64, k: &CameraIntrinsics) -> bool {
    let bound = RowBound::new(y, q, radius, k);
    // bisection depth is at most log2(width)
    let mut stack = [(0usize, 0usize); 64];
    stack[0] = (x0, x1);
    let mut top = 1;
    while top > 0 {
        top -= 1;
        let (lo, hi) = stack[top];
        if (index.row_min(y, lo, hi) as f64) >= bound.max_exit(lo, hi, q, radius, k) + 1e-6 {
            continue;
        }
        if hi - lo < 8 {
            if (lo..=hi).any(|x| occluded_in_ball(x, y, index.depth(x, y), q, radius, k)) {
                return true;
            }
            continue;
        }
        let mid = (lo + hi) / 2;
        stack[top] = (mid + 1, hi);
        stack[top + 1] = (lo, mid);
        top += 2;
    }
    false
}

/// Footprint ball radius at camera depth `z`: the vehicle radius plus one
/// pixel, so surfaces grazing the ball between pixel centers are caught.
pub(crate) fn footprint_radius(radius: f64, z: f64, k: &CameraIntrinsics) -> f64 {
    radius + z / k.focal_x.min(k.focal_y)
}

/// Column range covering every footprint row, clamped to the image.
fn footprint_columns(q: &Vec3, radius: f64, k: &CameraIntrinsics) -> (usize, usize) {
    let w = k.width as i64;
    if q.z <= radius {
        return (0, (w - 1) as usize);
    }
    let a = q.z * q.z - radius * radius;
    let s = radius * (q.x * q.x + a).sqrt();
    let lo = (k.focal_x * (q.x * q.z - s) / a + k.center_x).floor() as i64;
    let hi = (k.focal_x * (q.x * q.z + s) / a + k.center_x).ceil() as i64;
    (lo.clamp(0, w - 1) as usize, hi.clamp(0, w - 1) as usize)
}

/// Sample times along a trajectory: every `step` seconds, bisected until
/// consecutive positions are at most `max_spacing` apart; `T` is included.
pub fn sample_times(traj: &PolynomialTrajectory, step: f64, max_spacing: f64) -> Vec<f64> {
    SampleTimes::new(traj, step, max_spacing).map(|(t, _)| t).collect()
}

/// Iterator form of [`sample_times`], yielding `(t, position)`.
pub struct SampleTimes<'a> {
    traj: &'a PolynomialTrajectory,
    step: f64,
    max_spacing: f64,
    n: usize,
    next_step: usize,
    prev: Option<(f64, Vec3)>,
    // pending interval ends, latest first; depth is bounded by the 1e-9 s floor
    pending: [(f64, Vec3); 64],
    top: usize,
}

impl<'a> SampleTimes<'a> {
    pub fn new(traj: &'a PolynomialTrajectory, step: f64, max_spacing: f64) -> Self {
        Self {
            traj,
            step,
            max_spacing,
            n: (traj.duration() / step).ceil().max(1.0) as usize,
            next_step: 1,
            prev: None,
            pending: [(0.0, Vec3::zeros()); 64],
            top: 0,
        }
    }
}

impl Iterator for SampleTimes<'_> {
    type Item = (f64, Vec3);

    fn next(&mut self) -> Option<(f64, Vec3)> {
        let Some((t_prev, p_prev)) = self.prev else {
            let first = (0.0, self.traj.position(0.0));
            self.prev = Some(first);
            return Some(first);
        };
        if self.top == 0 {
            if self.next_step > self.n {
                return None;
            }
            let i = self.next_step;
            self.next_step += 1;
            let t = if i == self.n { self.traj.duration() } else { i as f64 * self.step };
            self.pending[0] = (t, self.traj.position(t));
            self.top = 1;
        }
        loop {
            let (t, p) = self.pending[self.top - 1];
            if (p - p_prev).norm() > self.max_spacing && t - t_prev > 1e-9 && self.top < self.pending.len() {
                let mid = 0.5 * (t_prev + t);
                self.pending[self.top] = (mid, self.traj.position(mid));
                self.top += 1;
                continue;
            }
            self.top -= 1;
            self.prev = Some((t, p));
            return Some((t, p));
        }
    }
}

enum SampleOutcome {
    Safe(u64),
    Unsafe(u64),
}

fn check_point(
    point_world: &Vec3,
    start: &Vec3,
    index: &DepthIndex,
    k: &CameraIntrinsics,
    pose: &Pose,
    cfg: &CollisionConfig,
) -> SampleOutcome {
    if (point_world - start).norm() <= cfg.start_free_radius {
        return SampleOutcome::Safe(0);
    }
    let q = pose.world_to_camera(point_world);
    if q.z < cfg.z_near {
        return SampleOutcome::Unsafe(0);
    }
    let fr = footprint_radius(cfg.radius, q.z, k);
    if placement(&q, fr, k, q.norm() >= cfg.full_view_distance) == Placement::Outside {
        return SampleOutcome::Unsafe(0);
    }
    let (cx0, cx1) = footprint_columns(&q, fr, k);
    let last_row = index.height() - 1;
    let mut band = (usize::MAX, false);
    let mut touched = 0u64;
    for (y, x0, x1) in footprint_rows(&q, fr, k) {
        touched += (x1 - x0 + 1) as u64;
        if band.0 != y / BAND {
            let (b0, b1) = (y / BAND * BAND, (y / BAND * BAND + BAND - 1).min(last_row));
            let clear = index.band_min(y, cx0, cx1) as f64 >= band_max_exit(b0, b1, &q, fr, k) + 1e-6;
            band = (y / BAND, clear);
        }
        if band.1 {
            continue;
        }
        if span_violates(index, y, x0, x1, &q, fr, k) {
            return SampleOutcome::Unsafe(touched);
        }
    }
    SampleOutcome::Safe(touched)
}

/// Checks a trajectory against a prepared depth index.
pub fn check_indexed(
    traj: &PolynomialTrajectory,
    index: &DepthIndex,
    k: &CameraIntrinsics,
    pose: &Pose,
    cfg: &CollisionConfig,
) -> CheckReport {
    let start = traj.start().position;
    let mut pixels_touched = 0u64;
    for (t, p) in SampleTimes::new(traj, cfg.step, cfg.radius / 2.0) {
        match check_point(&p, &start, index, k, pose, cfg) {
            SampleOutcome::Safe(n) => pixels_touched += n,
            SampleOutcome::Unsafe(n) => {
                return CheckReport {
                    verdict: CollisionVerdict::Collision { time: t },
                    pixels_touched: pixels_touched + n,
                }
            }
        }
    }
    CheckReport {
        verdict: CollisionVerdict::Free,
        pixels_touched,
    }
}

/// Same verdict as [`check_indexed`] without the first violation time:
/// samples are visited endpoint first, then every eighth, then the rest, so
/// rejected trajectories usually stop early. Returns whether the trajectory
/// is free and the pixels touched.
pub fn is_free_indexed(
    traj: &PolynomialTrajectory,
    index: &DepthIndex,
    k: &CameraIntrinsics,
    pose: &Pose,
    cfg: &CollisionConfig,
) -> (bool, u64) {
    const STRIDE: usize = 8;
    let start = traj.start().position;
    let samples: Vec<Vec3> = SampleTimes::new(traj, cfg.step, cfg.radius / 2.0).map(|(_, p)| p).collect();
    let last = samples.len() - 1;
    let order = std::iter::once(last)
        .chain((0..last).step_by(STRIDE))
        .chain((0..last).filter(|i| i % STRIDE != 0));
    let mut touched = 0u64;
    for i in order {
        match check_point(&samples[i], &start, index, k, pose, cfg) {
            SampleOutcome::Safe(n) => touched += n,
            SampleOutcome::Unsafe(n) => return (false, touched + n),
        }
    }
    (true, touched)
}

pub fn check(
    traj: &PolynomialTrajectory,
    img: &DepthImage,
    k: &CameraIntrinsics,
    pose: &Pose,
    cfg: &CollisionConfig,
) -> CheckReport {
    check_indexed(traj, &DepthIndex::new(img), k, pose, cfg)
}

/// Classifies a trajectory against the true obstacle geometry. Priority is
/// endpoint-inside, then passes-through, then too-close.
pub fn classify_ground_truth(
    traj: &PolynomialTrajectory,
    world: &World,
    radius: f64,
    step: f64,
) -> TrajectoryClass {
    if world.is_occupied(&traj.endpoint()) {
        return TrajectoryClass::EndpointInside;
    }
    let mut class = TrajectoryClass::Free;
    for t in sample_times(traj, step, radius / 2.0) {
        let sd = world.signed_distance(&traj.position(t));
        if sd < 0.0 {
            return TrajectoryClass::PassesThrough;
        }
        if sd < radius {
            class = TrajectoryClass::TooClose;
        }
    }
    class
}
