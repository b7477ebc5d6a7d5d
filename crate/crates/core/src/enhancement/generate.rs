//! Coarse frame generation and coarse-to-fine composition.
//!
//! The decoded feature recalibrates the base reconstruction with an
//! upsampled per-cell gain (coarse stage); block matching between the
//! coarse frame and the key reconstruction then re-estimates motion so the
//! final frame warps original key-frame texture instead of compounding
//! base-layer texture errors, weighted by an occlusion map.

use super::FeatureMap;
use crate::error::{Error, Result};
use crate::media::sampling::{upsample_bilinear, upsample_bilinear_grid, warp_bilinear};
use crate::media::{Frame, MotionField, OcclusionMap};

/// Stabilizer added to numerator and denominator of the gain ratio.
pub const GAIN_EPSILON: f64 = 1.0;
/// Gain clamp bounds.
pub const GAIN_CLAMP: (f64, f64) = (0.5, 2.0);

/// SAD-per-pixel value at which a block counts as fully occluded.
const OCCLUSION_SAD_SCALE: f64 = 64.0;

/// Multiply the base reconstruction, per channel, by the upsampled ratio of
/// the decoded feature to the base frame's own feature. Produces the
/// coarsely enhanced frame.
pub fn recalibrate(base_frame: &Frame, feature: &FeatureMap) -> Result<Frame> {
    let s = feature.side();
    let base_feature = super::extract_feature(base_frame, s)?;
    let gains: Vec<f64> = feature
        .values()
        .iter()
        .zip(base_feature.values())
        .map(|(&want, &have)| {
            ((want + GAIN_EPSILON) / (have + GAIN_EPSILON)).clamp(GAIN_CLAMP.0, GAIN_CLAMP.1)
        })
        .collect();
    let (w, h) = (base_frame.width(), base_frame.height());
    let dense_gain = upsample_bilinear(&gains, s, w, h);
    let plane = w * h;
    let mut out = vec![0u8; 3 * plane];
    for c in 0..3 {
        let src = base_frame.plane(c);
        for i in 0..plane {
            out[c * plane + i] = (src[i] as f64 * dense_gain[i]).round().clamp(0.0, 255.0) as u8;
        }
    }
    Frame::new(w, h, out)
}

fn luminance_fixed(frame: &Frame) -> Vec<i32> {
    let plane = frame.width() * frame.height();
    let (r, g, b) = (frame.plane(0), frame.plane(1), frame.plane(2));
    (0..plane)
        .map(|i| {
            (4.0 * (0.299 * r[i] as f64 + 0.587 * g[i] as f64 + 0.114 * b[i] as f64)).round() as i32
        })
        .collect()
}

/// Full-search block matching of `coarse` against `key_recon` on luminance.
///
/// Per block the winner is the smallest SAD, ties broken by smallest
/// |dx|+|dy|, then by dy, then by dx. Block vectors are bilinearly
/// interpolated to a per-pixel field; the occlusion value of a block is
/// clamp(1 - SAD_per_pixel / 64, 0, 1), constant over the block.
pub fn refine_motion(
    key_recon: &Frame,
    coarse: &Frame,
    block: usize,
    search: usize,
) -> Result<(MotionField, OcclusionMap)> {
    if !key_recon.same_dimensions(coarse) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", key_recon.width(), key_recon.height()),
            got: format!("{}x{}", coarse.width(), coarse.height()),
        });
    }
    let (w, h) = (coarse.width(), coarse.height());
    if block == 0 || w % block != 0 || h % block != 0 {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            reason: "dimensions must be multiples of the matching block size",
        });
    }
    let key_lum = luminance_fixed(key_recon);
    let coarse_lum = luminance_fixed(coarse);
    let (bw, bh) = (w / block, h / block);
    let mut vx = vec![0.0f64; bw * bh];
    let mut vy = vec![0.0f64; bw * bh];
    let mut occ_blocks = vec![0.0f64; bw * bh];
    let range = search as isize;

    for by in 0..bh {
        for bx in 0..bw {
            let ox = bx * block;
            let oy = by * block;
            // (sad, |dx|+|dy|, dy, dx) lexicographic minimum
            let mut best = (i64::MAX, isize::MAX, isize::MAX, isize::MAX);
            for dy in -range..=range {
                let sy = oy as isize + dy;
                if sy < 0 || sy as usize + block > h {
                    continue;
                }
                for dx in -range..=range {
                    let sx = ox as isize + dx;
                    if sx < 0 || sx as usize + block > w {
                        continue;
                    }
                    let mut sad: i64 = 0;
                    'rows: for row in 0..block {
                        let ci = (oy + row) * w + ox;
                        let ki = (sy as usize + row) * w + sx as usize;
                        for col in 0..block {
                            sad += (coarse_lum[ci + col] - key_lum[ki + col]).abs() as i64;
                            if sad > best.0 {
                                break 'rows;
                            }
                        }
                    }
                    let candidate = (sad, dx.abs() + dy.abs(), dy, dx);
                    if candidate < best {
                        best = candidate;
                    }
                }
            }
            let i = by * bw + bx;
            vx[i] = best.3 as f64;
            vy[i] = best.2 as f64;
            // SAD is in quarter-luminance fixed point
            let sad_norm = best.0 as f64 / (4.0 * (block * block) as f64);
            occ_blocks[i] = (1.0 - sad_norm / OCCLUSION_SAD_SCALE).clamp(0.0, 1.0);
        }
    }

    let dx = upsample_bilinear_grid(&vx, bw, bh, w, h);
    let dy = upsample_bilinear_grid(&vy, bw, bh, w, h);
    let field = MotionField::from_components(w, h, dx, dy)?;
    let mut occ = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            occ[y * w + x] = occ_blocks[(y / block) * bw + x / block];
        }
    }
    Ok((field, OcclusionMap::new(w, h, occ)?))
}

/// Final composition: warp the key reconstruction by the refined field and
/// blend it against the coarse frame with the occlusion weights.
pub fn compose_fine(
    key_recon: &Frame,
    coarse: &Frame,
    field: &MotionField,
    occ: &OcclusionMap,
) -> Result<Frame> {
    if !key_recon.same_dimensions(coarse)
        || occ.width() != coarse.width()
        || occ.height() != coarse.height()
    {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", key_recon.width(), key_recon.height()),
            got: "mismatched coarse/occlusion dimensions".into(),
        });
    }
    let warped = warp_bilinear(key_recon, field)?;
    let (w, h) = (coarse.width(), coarse.height());
    let plane = w * h;
    let mut out = vec![0u8; 3 * plane];
    for c in 0..3 {
        let pw = warped.plane(c);
        let pc = coarse.plane(c);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let a = occ.at(x, y);
                let v = a * pw[i] as f64 + (1.0 - a) * pc[i] as f64;
                out[c * plane + i] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Frame::new(w, h, out)
}
