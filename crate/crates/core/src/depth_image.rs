//! The latest depth frame: the only world knowledge a memoryless planner has.

use thiserror::Error;

/// Stored value for pixels without a sensor return.
pub const INVALID_DEPTH: f32 = 0.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DepthImageError {
    #[error("pixel ({x}, {y}) outside {width}x{height} image")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("expected {expected} depth values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("depth at index {index} is negative or not finite: {value}")]
    InvalidValue { index: usize, value: f32 },
    #[error("image has no valid pixel")]
    NoValidPixel,
}

/// Row-major matrix of metric depths (meters along the optical axis).
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

/// Closest valid pixel in an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    pub x: u32,
    pub y: u32,
    pub depth: f64,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Result<Self, DepthImageError> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(DepthImageError::SizeMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(DepthImageError::InvalidValue { index, value });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, depth: f32) -> Self {
        assert!(depth.is_finite() && depth >= 0.0, "depth must be finite and non-negative");
        Self {
            width,
            height,
            data: vec![depth; width as usize * height as usize],
        }
    }

    /// Image with no returns anywhere.
    pub fn invalid(width: u32, height: u32) -> Self {
        Self::filled(width, height, INVALID_DEPTH)
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> f32) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                data.push(if v.is_finite() && v > 0.0 { v } else { INVALID_DEPTH });
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, y: u32) -> &[f32] {
        let w = self.width as usize;
        &self.data[y as usize * w..(y as usize + 1) * w]
    }

    /// Depth at an integer pixel; `Ok(None)` for a pixel with no return.
    pub fn query(&self, x: u32, y: u32) -> Result<Option<f64>, DepthImageError> {
        if x >= self.width || y >= self.height {
            return Err(DepthImageError::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let v = self.data[y as usize * self.width as usize + x as usize];
        Ok((v != INVALID_DEPTH).then_some(v as f64))
    }

    /// Overwrites one pixel. Negative or non-finite values become invalid.
    pub fn set(&mut self, x: u32, y: u32, depth: f32) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y as usize * self.width as usize + x as usize] =
            if depth.is_finite() && depth > 0.0 { depth } else { INVALID_DEPTH };
    }

    /// Smallest valid depth. Ties go to the first pixel in row-major order.
    pub fn nearest_point(&self) -> Result<NearestPoint, DepthImageError> {
        let mut best: Option<(usize, f32)> = None;
        for (i, &v) in self.data.iter().enumerate() {
            if v != INVALID_DEPTH && best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        let (i, v) = best.ok_or(DepthImageError::NoValidPixel)?;
        let w = self.width as usize;
        Ok(NearestPoint {
            x: (i % w) as u32,
            y: (i / w) as u32,
            depth: v as f64,
        })
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != INVALID_DEPTH).count()
    }
}
