//! Synthetic test-sequence generation with ground-truth motion.
//!
//! Sequences are a procedurally textured key frame (smooth gradient
//! background plus a high-frequency textured ellipse) warped per frame by
//! the same keypoint-driven dense-motion kernel the base layer uses, so the
//! returned keypoint track is the exact ground truth. Generation is a pure
//! function of the spec: all randomness comes from the SplitMix generator
//! and no libm calls enter the pixel path.

use super::frame::{Frame, VideoSequence};
use crate::base_layer::{dense_motion_from_keypoints, KeypointSet, KeypointTrack};
use crate::error::{Error, Result};
use crate::math::{det_exp, SplitMix64};
use crate::media::sampling::warp_bilinear;

/// How keypoints move over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MotionMode {
    /// Every keypoint follows its own triangle-wave trajectory.
    #[default]
    Independent,
    /// All keypoints share one integer-valued translation per frame, scaled
    /// so the kernel-normalized dense field itself is integer-valued. This
    /// produces content whose true motion is pixel-aligned.
    GlobalInteger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub fps: u32,
    pub keypoint_count: usize,
    pub seed: u64,
    /// Peak keypoint displacement in pixels.
    pub motion_amplitude: f64,
    /// Dense-motion kernel bandwidth tau, in pixels.
    pub kernel_bandwidth: f64,
    pub motion_mode: MotionMode,
    /// Multiplicative brightness of a static highlight patch; 1.0 disables
    /// it. The patch is anchored to the frame while content moves beneath
    /// it, so it shows up in every frame (the key frame included) at a
    /// fixed position.
    pub highlight_gain: f64,
    /// Highlight rectangle (x, y, w, h) in pixels; `None` picks a centered
    /// block-aligned square when the gain is active.
    pub highlight_rect: Option<(usize, usize, usize, usize)>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            frame_count: 50,
            fps: 25,
            keypoint_count: 10,
            seed: 0,
            motion_amplitude: 8.0,
            kernel_bandwidth: 24.0,
            motion_mode: MotionMode::Independent,
            highlight_gain: 1.0,
            highlight_rect: None,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidDimensions {
                width: self.width,
                height: self.height,
                reason: "zero-area frame",
            });
        }
        if self.frame_count < 2 {
            return Err(Error::InvalidConfig(format!(
                "frame_count must be >= 2, got {}",
                self.frame_count
            )));
        }
        if !(self.kernel_bandwidth > 0.0) {
            return Err(Error::InvalidConfig("kernel bandwidth must be > 0".into()));
        }
        if !(self.highlight_gain >= 0.5 && self.highlight_gain <= 2.0) {
            return Err(Error::InvalidConfig(
                "highlight gain must lie in [0.5, 2.0]".into(),
            ));
        }
        if let Some((x, y, w, h)) = self.highlight_rect {
            if x + w > self.width || y + h > self.height || w == 0 || h == 0 {
                return Err(Error::InvalidConfig("highlight rect outside frame".into()));
            }
        }
        Ok(())
    }

    fn resolved_highlight(&self) -> Option<(usize, usize, usize, usize)> {
        if self.highlight_gain == 1.0 {
            return None;
        }
        Some(self.highlight_rect.unwrap_or_else(|| {
            let side = ((self.width.min(self.height) / 4) & !15).max(16);
            let x = ((self.width - side) / 2) & !15;
            let y = ((self.height - side) / 2) & !15;
            (x, y, side, side)
        }))
    }
}

fn hash_noise(seed: u64, x: usize, y: usize, range: u64) -> i32 {
    let mut z = seed ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z % range) as i32 - (range as i32 - 1) / 2
}

/// Gradient background with a textured ellipse: rings from integer radius
/// bands plus per-pixel hash noise. Channel values stay within [96, 168]
/// inside the ellipse and [120, 164] outside, which keeps the highlight
/// patch multiplication clamp-free up to gain 1.5.
fn key_frame(spec: &SyntheticSpec) -> Frame {
    let (w, h) = (spec.width, spec.height);
    let plane = w * h;
    let mut data = vec![0u8; 3 * plane];
    let cx = w as f64 / 2.0;
    let cy = h as f64 / 2.0;
    let ra = 0.33 * w as f64;
    let rb = 0.36 * h as f64;
    let icx = (w / 2) as i64;
    let icy = (h / 2) as i64;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let fx = (x as f64 - cx) / ra;
            let fy = (y as f64 - cy) / rb;
            if fx * fx + fy * fy <= 1.0 {
                let dx = x as i64 - icx;
                let dy = y as i64 - icy;
                // 8-px radial bands; f64 sqrt of an integer is exactly rounded
                let dist = ((dx * dx + dy * dy) as f64).sqrt() as u64;
                let ring = if (dist >> 3) & 1 == 0 { 8 } else { -8 };
                let noise = hash_noise(spec.seed, x, y, 49);
                let v = 132 + ring + noise;
                data[i] = (v + 4) as u8;
                data[plane + i] = v as u8;
                data[2 * plane + i] = (v - 4) as u8;
            } else {
                data[i] = (120 + 44 * x / (w - 1).max(1)) as u8;
                data[plane + i] = (120 + 44 * y / (h - 1).max(1)) as u8;
                data[2 * plane + i] = 142;
            }
        }
    }
    Frame::new(w, h, data).expect("validated dimensions")
}

fn sample_keypoints(spec: &SyntheticSpec, rng: &mut SplitMix64) -> Vec<(f64, f64)> {
    let mut points = Vec::with_capacity(spec.keypoint_count);
    while points.len() < spec.keypoint_count {
        let u = rng.next_range(-0.75, 0.75);
        let v = rng.next_range(-0.75, 0.75);
        if u * u + v * v <= 0.5625 {
            points.push((0.5 + u * 0.33, 0.5 + v * 0.36));
        }
    }
    points
}

/// Triangle ramp 0 -> amp -> 0 with unit steps of `amp/period`.
fn triangle(l: usize, period: usize, amp: f64) -> f64 {
    if period == 0 || amp == 0.0 {
        return 0.0;
    }
    let m = l % (2 * period);
    let steps = if m <= period { m } else { 2 * period - m };
    amp * steps as f64 / period as f64
}

#[derive(Clone, Copy)]
struct Trajectory {
    amp_x: f64,
    amp_y: f64,
    period_x: usize,
    period_y: usize,
    dir_x: f64,
    dir_y: f64,
}

impl Trajectory {
    fn displacement_px(&self, l: usize) -> (f64, f64) {
        (
            self.dir_x * triangle(l, self.period_x, self.amp_x),
            self.dir_y * triangle(l, self.period_y, self.amp_y),
        )
    }
}

/// Generate a sequence plus its exact keypoint track. Frame 0 is the key
/// frame; inter frame l is frame 0 warped by the dense field between the
/// track's frame-0 and frame-l keypoints (and optionally brightened inside
/// the highlight patch).
pub fn generate_synthetic_sequence(spec: &SyntheticSpec) -> Result<(VideoSequence, KeypointTrack)> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let base = key_frame(spec);
    let anchors = sample_keypoints(spec, &mut rng);

    // per-keypoint trajectories (Independent) or one shared integer path
    // (GlobalInteger, displacement scaled by (N + w_bg)/N so the normalized
    // dense field is integer-valued)
    let trajectories: Vec<Trajectory> = match spec.motion_mode {
        MotionMode::Independent => (0..spec.keypoint_count)
            .map(|_| Trajectory {
                amp_x: spec.motion_amplitude * rng.next_range(0.3, 1.0),
                amp_y: spec.motion_amplitude * rng.next_range(0.3, 1.0),
                period_x: 8 + rng.next_below(17) as usize,
                period_y: 8 + rng.next_below(17) as usize,
                dir_x: if rng.next_below(2) == 0 { 1.0 } else { -1.0 },
                dir_y: if rng.next_below(2) == 0 { 1.0 } else { -1.0 },
            })
            .collect(),
        MotionMode::GlobalInteger => {
            let amp = (spec.motion_amplitude.floor().max(0.0) as usize).min(12);
            let n = spec.keypoint_count.max(1) as f64;
            let scale = (n + det_exp(-2.0)) / n;
            let dir_x = if rng.next_below(2) == 0 { 1.0 } else { -1.0 };
            let dir_y = if rng.next_below(2) == 0 { 1.0 } else { -1.0 };
            let shared = Trajectory {
                amp_x: amp as f64 * scale,
                amp_y: ((amp / 2).max(1) as f64) * scale,
                period_x: amp.max(1),
                period_y: (amp / 2).max(1),
                dir_x,
                dir_y,
            };
            vec![shared; spec.keypoint_count]
        }
    };

    let mut sets = Vec::with_capacity(spec.frame_count);
    for l in 0..spec.frame_count {
        let points = anchors
            .iter()
            .zip(&trajectories)
            .map(|(&(ax, ay), t)| {
                let (dx, dy) = t.displacement_px(l);
                (ax + dx / spec.width as f64, ay + dy / spec.height as f64)
            })
            .collect();
        sets.push(KeypointSet::new(points)?);
    }
    let track = KeypointTrack::new(sets)?;

    let highlight = spec.resolved_highlight();
    let apply_highlight = |frame: &mut Frame| {
        if let Some((hx, hy, hw, hh)) = highlight {
            for y in hy..hy + hh {
                for x in hx..hx + hw {
                    for c in 0..3 {
                        let v = frame.sample(c, x, y) as f64 * spec.highlight_gain;
                        frame.set_sample(c, x, y, v.round().clamp(0.0, 255.0) as u8);
                    }
                }
            }
        }
    };
    let mut frames = Vec::with_capacity(spec.frame_count);
    let mut key = base.clone();
    apply_highlight(&mut key);
    frames.push(key);
    for l in 1..spec.frame_count {
        let field = dense_motion_from_keypoints(
            track.set(0),
            track.set(l),
            spec.kernel_bandwidth,
            spec.width,
            spec.height,
        )?;
        // content warps beneath the frame-anchored highlight
        let mut frame = warp_bilinear(&base, &field)?;
        apply_highlight(&mut frame);
        frames.push(frame);
    }
    Ok((VideoSequence::new(frames, spec.fps)?, track))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_keypoints_make_every_inter_frame_equal_frame_zero() {
        let spec = SyntheticSpec {
            width: 64,
            height: 64,
            frame_count: 5,
            keypoint_count: 0,
            ..Default::default()
        };
        let (seq, track) = generate_synthetic_sequence(&spec).unwrap();
        assert_eq!(track.keypoint_count(), 0);
        for l in 1..5 {
            assert_eq!(seq.frame(l), seq.frame(0));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec {
            width: 64,
            height: 48,
            frame_count: 6,
            keypoint_count: 4,
            seed: 1234,
            ..Default::default()
        };
        let (a, ta) = generate_synthetic_sequence(&spec).unwrap();
        let (b, tb) = generate_synthetic_sequence(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn paper_shaped_sequence_dimensions() {
        let spec = SyntheticSpec {
            frame_count: 250,
            fps: 25,
            keypoint_count: 2,
            ..Default::default()
        };
        let (seq, track) = generate_synthetic_sequence(&spec).unwrap();
        assert_eq!(seq.len(), 250);
        assert_eq!(seq.fps(), 25);
        assert_eq!(seq.width(), 256);
        assert_eq!(seq.height(), 256);
        assert_eq!(track.frame_count(), 250);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::default();
        spec.frame_count = 1;
        assert!(generate_synthetic_sequence(&spec).is_err());
        let mut spec = SyntheticSpec::default();
        spec.width = 0;
        assert!(generate_synthetic_sequence(&spec).is_err());
    }

    #[test]
    fn global_integer_mode_moves_content_by_whole_pixels() {
        let spec = SyntheticSpec {
            width: 64,
            height: 64,
            frame_count: 4,
            keypoint_count: 6,
            seed: 3,
            motion_amplitude: 3.0,
            kernel_bandwidth: 1e12,
            motion_mode: MotionMode::GlobalInteger,
            ..Default::default()
        };
        let (seq, track) = generate_synthetic_sequence(&spec).unwrap();
        // frame 1 must be an exact integer translation of frame 0 in the
        // interior (clamped bands at the borders excluded)
        let n = spec.keypoint_count as f64;
        let scale = n / (n + det_exp(-2.0));
        let dx = track.set(1).points()[0].0 - track.set(0).points()[0].0;
        let dy = track.set(1).points()[0].1 - track.set(0).points()[0].1;
        let shift_x = (dx * 64.0 * scale).round() as i64;
        let shift_y = (dy * 64.0 * scale).round() as i64;
        assert!(shift_x != 0 || shift_y != 0);
        let f0 = seq.frame(0);
        let f1 = seq.frame(1);
        let mut mismatches = 0;
        for y in 8..56i64 {
            for x in 8..56i64 {
                // content moves by the keypoint displacement
                let sx = (x - shift_x).clamp(0, 63) as usize;
                let sy = (y - shift_y).clamp(0, 63) as usize;
                for c in 0..3 {
                    if f1.sample(c, x as usize, y as usize) != f0.sample(c, sx, sy) {
                        mismatches += 1;
                    }
                }
            }
        }
        assert_eq!(mismatches, 0);
    }

    #[test]
    fn highlight_patch_is_static_across_frames() {
        let spec = SyntheticSpec {
            width: 64,
            height: 64,
            frame_count: 3,
            keypoint_count: 0,
            highlight_gain: 1.5,
            highlight_rect: Some((16, 16, 16, 16)),
            ..Default::default()
        };
        let (seq, _) = generate_synthetic_sequence(&spec).unwrap();
        // zero motion: the highlight appears identically in every frame
        assert_eq!(seq.frame(1), seq.frame(0));
        // and the patch actually brightens against a no-highlight render
        let mut plain = spec.clone();
        plain.highlight_gain = 1.0;
        let (plain_seq, _) = generate_synthetic_sequence(&plain).unwrap();
        let bright = seq.frame(0).sample(1, 20, 20) as f64;
        let dull = plain_seq.frame(0).sample(1, 20, 20) as f64;
        assert!((bright - (dull * 1.5).round()).abs() <= 1.0);
        assert_eq!(
            seq.frame(0).sample(1, 2, 2),
            plain_seq.frame(0).sample(1, 2, 2)
        );
    }
}
