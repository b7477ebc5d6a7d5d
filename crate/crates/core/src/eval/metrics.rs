//! Quality metrics and rate accounting.

use crate::error::{Error, Result};
use crate::math::det_exp;
use crate::media::{Frame, VideoSequence};

/// PSNR value reported for identical inputs (and the cap for near-identical
/// ones, so degenerate frames do not skew sequence averages).
pub const PSNR_CAP_DB: f64 = 99.0;

fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    if !a.same_dimensions(b) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.width(), a.height()),
            got: format!("{}x{}", b.width(), b.height()),
        });
    }
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio over all RGB samples, capped at 99 dB.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (255.0 * 255.0 / m).log10()).min(PSNR_CAP_DB))
}

/// Sequence PSNR: mean of per-frame dB values.
pub fn psnr_sequence(a: &VideoSequence, b: &VideoSequence) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} frames", a.len()),
            got: format!("{} frames", b.len()),
        });
    }
    let mut total = 0.0;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        total += psnr(fa, fb)?;
    }
    Ok(total / a.len() as f64)
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut w = [0.0f64; SSIM_WINDOW * SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as isize;
    let mut total = 0.0;
    for dy in -half..=half {
        for dx in -half..=half {
            let v = det_exp(-((dx * dx + dy * dy) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
            w[((dy + half) as usize) * SSIM_WINDOW + (dx + half) as usize] = v;
            total += v;
        }
    }
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Structural similarity on luminance with an 11x11 Gaussian window
/// (sigma 1.5), averaged over all fully valid window positions.
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    if !a.same_dimensions(b) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.width(), a.height()),
            got: format!("{}x{}", b.width(), b.height()),
        });
    }
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            reason: "frame smaller than the SSIM window",
        });
    }
    let la = a.luminance_plane();
    let lb = b.luminance_plane();
    let window = gaussian_window();
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=(h - SSIM_WINDOW) {
        for x0 in 0..=(w - SSIM_WINDOW) {
            let (mut mx, mut my) = (0.0, 0.0);
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let wv = window[wy * SSIM_WINDOW + wx];
                    let i = (y0 + wy) * w + x0 + wx;
                    mx += wv * la[i];
                    my += wv * lb[i];
                }
            }
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let wv = window[wy * SSIM_WINDOW + wx];
                    let i = (y0 + wy) * w + x0 + wx;
                    let da = la[i] - mx;
                    let db = lb[i] - my;
                    vx += wv * da * da;
                    vy += wv * db * db;
                    cov += wv * da * db;
                }
            }
            total += ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Sequence SSIM: mean of per-frame scores.
pub fn ssim_sequence(a: &VideoSequence, b: &VideoSequence) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} frames", a.len()),
            got: format!("{} frames", b.len()),
        });
    }
    let mut total = 0.0;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        total += ssim(fa, fb)?;
    }
    Ok(total / a.len() as f64)
}

/// total_bits * fps / frame_count / 1000.
pub fn bitrate_kbps(total_bits: u64, frame_count: usize, fps: u32) -> f64 {
    debug_assert!(frame_count > 0);
    total_bits as f64 * fps as f64 / frame_count as f64 / 1000.0
}

/// Lagrangian cost D + lambda * R.
pub fn rd_cost(distortion: f64, rate: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    distortion + lambda * rate
}
