//! Core image/video data model.

use crate::error::{Error, Result};

/// 8-bit RGB frame stored as row-major planes: all of R, then G, then B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Frame {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "zero-area frame",
            });
        }
        let expected = Self::CHANNELS
            .checked_mul(width)
            .and_then(|v| v.checked_mul(height))
            .ok_or(Error::InvalidDimensions {
                width,
                height,
                reason: "dimension overflow",
            })?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected: format!("{expected} samples"),
                got: format!("{} samples", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let plane = width * height;
        let mut data = Vec::with_capacity(3 * plane);
        for c in rgb {
            data.extend(std::iter::repeat(c).take(plane));
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn plane(&self, channel: usize) -> &[u8] {
        debug_assert!(channel < Self::CHANNELS);
        let plane = self.width * self.height;
        &self.data[channel * plane..(channel + 1) * plane]
    }

    #[inline]
    pub fn sample(&self, channel: usize, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[channel * self.width * self.height + y * self.width + x]
    }

    #[inline]
    pub fn set_sample(&mut self, channel: usize, x: usize, y: usize, v: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.data[channel * self.width * self.height + y * self.width + x] = v;
    }

    /// BT.601 luminance of one pixel.
    #[inline]
    pub fn luminance(&self, x: usize, y: usize) -> f64 {
        let plane = self.width * self.height;
        let i = y * self.width + x;
        0.299 * self.data[i] as f64
            + 0.587 * self.data[plane + i] as f64
            + 0.114 * self.data[2 * plane + i] as f64
    }

    /// Full luminance plane.
    pub fn luminance_plane(&self) -> Vec<f64> {
        let plane = self.width * self.height;
        let (r, g, b) = (
            &self.data[..plane],
            &self.data[plane..2 * plane],
            &self.data[2 * plane..],
        );
        (0..plane)
            .map(|i| 0.299 * r[i] as f64 + 0.587 * g[i] as f64 + 0.114 * b[i] as f64)
            .collect()
    }

    pub fn same_dimensions(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_invariants(&self) {
        debug_assert_eq!(self.data.len(), 3 * self.width * self.height);
    }
}

/// Ordered frames plus playback rate; frame 0 is the key-reference frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    fps: u32,
}

impl VideoSequence {
    pub fn new(frames: Vec<Frame>, fps: u32) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "a sequence needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        if fps == 0 {
            return Err(Error::InvalidConfig("fps must be positive".into()));
        }
        let first = &frames[0];
        for (i, f) in frames.iter().enumerate() {
            if !f.same_dimensions(first) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{}x{}", first.width(), first.height()),
                    got: format!("{}x{} at frame {i}", f.width(), f.height()),
                });
            }
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &Frame {
        &self.frames[i]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }
}

/// Dense backward motion field: destination pixel p samples the source at
/// p + (dx(p), dy(p)), in pixel units.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    width: usize,
    height: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl MotionField {
    pub fn zero(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            dx: vec![0.0; width * height],
            dy: vec![0.0; width * height],
        }
    }

    pub fn from_components(width: usize, height: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if dx.len() != width * height || dy.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} displacements", width * height),
                got: format!("{} / {}", dx.len(), dy.len()),
            });
        }
        if dx.iter().chain(dy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite motion component".into()));
        }
        Ok(Self {
            width,
            height,
            dx,
            dy,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, dx: f64, dy: f64) {
        debug_assert!(dx.is_finite() && dy.is_finite());
        let i = y * self.width + x;
        self.dx[i] = dx;
        self.dy[i] = dy;
    }

    pub fn max_magnitude(&self) -> f64 {
        self.dx
            .iter()
            .zip(&self.dy)
            .map(|(a, b)| (a * a + b * b).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Per-pixel confidence in [0, 1] weighting warped content against fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl OcclusionMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", width * height),
                got: format!("{}", values.len()),
            });
        }
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, v: f64) -> Self {
        Self {
            width,
            height,
            values: vec![v.clamp(0.0, 1.0); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_bad_shapes() {
        assert!(Frame::new(0, 8, vec![]).is_err());
        assert!(Frame::new(4, 4, vec![0; 47]).is_err());
        assert!(Frame::new(4, 4, vec![0; 48]).is_ok());
    }

    #[test]
    fn planes_are_laid_out_planar() {
        let mut data = vec![0u8; 3 * 4];
        data[0..4].fill(10); // R plane
        data[4..8].fill(20); // G plane
        data[8..12].fill(30); // B plane
        let f = Frame::new(2, 2, data).unwrap();
        assert_eq!(f.sample(0, 1, 1), 10);
        assert_eq!(f.sample(1, 0, 0), 20);
        assert_eq!(f.sample(2, 1, 0), 30);
        let y = f.luminance(0, 0);
        assert!((y - (0.299 * 10.0 + 0.587 * 20.0 + 0.114 * 30.0)).abs() < 1e-12);
    }

    #[test]
    fn sequence_requires_two_frames_and_uniform_size() {
        let f = Frame::filled(8, 8, [1, 2, 3]).unwrap();
        assert!(VideoSequence::new(vec![f.clone()], 25).is_err());
        let g = Frame::filled(16, 8, [0, 0, 0]).unwrap();
        assert!(VideoSequence::new(vec![f.clone(), g], 25).is_err());
        assert!(VideoSequence::new(vec![f.clone(), f], 25).is_ok());
    }

    #[test]
    fn occlusion_clamps_values() {
        let m = OcclusionMap::new(2, 1, vec![-0.5, 1.5]).unwrap();
        assert_eq!(m.at(0, 0), 0.0);
        assert_eq!(m.at(1, 0), 1.0);
    }
}
