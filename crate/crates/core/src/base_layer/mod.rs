//! Base layer: intra-coded key-reference frame, compact keypoint
//! parameters, and keypoint-driven dense-motion synthesis.

mod intra;
mod motion;
mod params;

pub use intra::{decode_key_frame, encode_key_frame, quantization_step};
pub use motion::{dense_motion_from_keypoints, synthesize_base, BACKGROUND_WEIGHT_EXPONENT};
pub use params::{
    decode_params, decode_params_frames, dequantize_keypoints, encode_params,
    encode_params_frames, quantize_keypoints, read_track_file, write_track_file, ParamCoder,
    ParamDecoder, DEFAULT_QSTEP, PGTK_MAGIC,
};

use crate::error::{Error, Result};

/// 2-D keypoints in normalized [0,1]² coordinates: the compact per-frame
/// motion representation carried by the base layer.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    points: Vec<(f64, f64)>,
}

impl KeypointSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidConfig("non-finite keypoint coordinate".into()));
        }
        let points = points
            .into_iter()
            .map(|(x, y)| (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)))
            .collect();
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Per-frame keypoint sets for a whole sequence; index 0 holds the
/// key-reference frame's analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointTrack {
    sets: Vec<KeypointSet>,
}

impl KeypointTrack {
    pub fn new(sets: Vec<KeypointSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptyTrack);
        }
        let n = sets[0].len();
        for s in &sets {
            if s.len() != n {
                return Err(Error::KeypointCountMismatch { a: n, b: s.len() });
            }
        }
        Ok(Self { sets })
    }

    pub fn keypoint_count(&self) -> usize {
        self.sets[0].len()
    }

    pub fn frame_count(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, frame: usize) -> &KeypointSet {
        &self.sets[frame]
    }

    pub fn sets(&self) -> &[KeypointSet] {
        &self.sets
    }
}

/// Returns the ground-truth keypoints for one frame. Analysis is an oracle
/// over the synthesis-time track, which isolates codec error from any
/// detector error.
pub fn analyze(frame_index: usize, oracle: &KeypointTrack) -> Result<KeypointSet> {
    if frame_index >= oracle.frame_count() {
        return Err(Error::FrameIndexOutOfRange {
            index: frame_index,
            len: oracle.frame_count(),
        });
    }
    Ok(oracle.set(frame_index).clone())
}

/// Quantization parameter for the key-frame intra codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntraQp(i32);

impl IntraQp {
    pub const ALLOWED: [i32; 6] = [2, 12, 22, 32, 42, 52];

    pub fn new(qp: i32) -> Result<Self> {
        if Self::ALLOWED.contains(&qp) {
            Ok(Self(qp))
        } else {
            Err(Error::QpNotAllowed { qp })
        }
    }

    pub fn value(&self) -> i32 {
        self.0
    }

    /// Uniform quantizer step, floored at 1 so the lowest QPs stay
    /// near-lossless: max(1, 2^((qp-4)/6)).
    pub fn step(&self) -> f64 {
        quantization_step(self.0)
    }
}
