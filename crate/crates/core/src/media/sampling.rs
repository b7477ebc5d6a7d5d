//! Shared resampling primitives: bilinear warping, band-limited
//! downsampling and gain-map upsampling.

use super::frame::{Frame, MotionField};
use crate::enhancement::FeatureMap;
use crate::error::{Error, Result};

/// Binomial low-pass kernel applied per axis per octave.
const BINOMIAL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
const BINOMIAL_NORM: f64 = 16.0;

/// Backward-warp a frame: destination pixel p samples the source at
/// p + (dx, dy) with bilinear interpolation. Source coordinates are clamped
/// to the frame rectangle, so out-of-frame motion replicates edges.
pub fn warp_bilinear(frame: &Frame, field: &MotionField) -> Result<Frame> {
    if frame.width() != field.width() || frame.height() != field.height() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", frame.width(), frame.height()),
            got: format!("{}x{}", field.width(), field.height()),
        });
    }
    let (w, h) = (frame.width(), frame.height());
    let plane = w * h;
    let mut out = vec![0u8; 3 * plane];
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = field.at(x, y);
            let sx = (x as f64 + dx).clamp(0.0, (w - 1) as f64);
            let sy = (y as f64 + dy).clamp(0.0, (h - 1) as f64);
            let x0 = sx.floor() as usize;
            let y0 = sy.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(h - 1);
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            let w00 = (1.0 - fx) * (1.0 - fy);
            let w10 = fx * (1.0 - fy);
            let w01 = (1.0 - fx) * fy;
            let w11 = fx * fy;
            let (i00, i10, i01, i11) = (y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1);
            for c in 0..3 {
                let p = frame.plane(c);
                let v = w00 * p[i00] as f64
                    + w10 * p[i10] as f64
                    + w01 * p[i01] as f64
                    + w11 * p[i11] as f64;
                out[c * plane + y * w + x] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    let result = Frame::new(w, h, out)?;
    result.check_invariants();
    Ok(result)
}

fn filter_binomial_and_decimate(src: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    // horizontal pass with edge replication
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, coef) in BINOMIAL.iter().enumerate() {
                let xi = (x as isize + k as isize - 2).clamp(0, w as isize - 1) as usize;
                acc += coef * row[xi];
            }
            tmp[y * w + x] = acc / BINOMIAL_NORM;
        }
    }
    // vertical pass
    let mut filtered = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, coef) in BINOMIAL.iter().enumerate() {
                let yi = (y as isize + k as isize - 2).clamp(0, h as isize - 1) as usize;
                acc += coef * tmp[yi * w + x];
            }
            filtered[y * w + x] = acc / BINOMIAL_NORM;
        }
    }
    // phase-centered factor-2 decimation: average sample pairs so the
    // output grid's cell centers stay aligned with box means
    let nw = w.div_ceil(2);
    let nh = h.div_ceil(2);
    let mut out = vec![0.0; nw * nh];
    for y in 0..nh {
        let y0 = 2 * y;
        let y1 = (2 * y + 1).min(h - 1);
        for x in 0..nw {
            let x0 = 2 * x;
            let x1 = (2 * x + 1).min(w - 1);
            out[y * nw + x] = 0.25
                * (filtered[y0 * w + x0]
                    + filtered[y0 * w + x1]
                    + filtered[y1 * w + x0]
                    + filtered[y1 * w + x1]);
        }
    }
    (out, nw, nh)
}

/// Area-average an arbitrary grid down to exactly `s`×`s`.
fn box_resample(src: &[f64], w: usize, h: usize, s: usize) -> Vec<f64> {
    let mut out = vec![0.0; s * s];
    let sx = w as f64 / s as f64;
    let sy = h as f64 / s as f64;
    for j in 0..s {
        let y0 = j as f64 * sy;
        let y1 = (j + 1) as f64 * sy;
        for i in 0..s {
            let x0 = i as f64 * sx;
            let x1 = (i + 1) as f64 * sx;
            let mut acc = 0.0;
            let mut area = 0.0;
            let mut y = y0.floor() as usize;
            while (y as f64) < y1 && y < h {
                let wy = (y1.min((y + 1) as f64) - y0.max(y as f64)).max(0.0);
                if wy > 0.0 {
                    let mut x = x0.floor() as usize;
                    while (x as f64) < x1 && x < w {
                        let wx = (x1.min((x + 1) as f64) - x0.max(x as f64)).max(0.0);
                        if wx > 0.0 {
                            acc += wx * wy * src[y * w + x];
                            area += wx * wy;
                        }
                        x += 1;
                    }
                }
                y += 1;
            }
            out[j * s + i] = acc / area;
        }
    }
    out
}

/// Band-limited downsampling of the BT.601 luminance plane to an `s`×`s`
/// grid: the binomial kernel runs once per octave with factor-2 decimation
/// while both dimensions stay at or above `s`, then a box average produces
/// the exact target size. Output values stay in [0, 255].
pub fn downsample_band_limited(frame: &Frame, s: usize) -> Result<FeatureMap> {
    FeatureMap::validate_side(s)?;
    if s > frame.width().min(frame.height()) {
        return Err(Error::InvalidDimensions {
            width: frame.width(),
            height: frame.height(),
            reason: "feature side larger than frame",
        });
    }
    let mut data = frame.luminance_plane();
    let (mut w, mut h) = (frame.width(), frame.height());
    while w.div_ceil(2) >= s && h.div_ceil(2) >= s {
        let (next, nw, nh) = filter_binomial_and_decimate(&data, w, h);
        data = next;
        w = nw;
        h = nh;
    }
    let values = if (w, h) == (s, s) {
        data
    } else {
        box_resample(&data, w, h, s)
    };
    FeatureMap::new(s, values)
}

/// Bilinearly upsample an `s`×`s` grid to `w`×`h`, cell centers aligned to
/// pixel centers (the usual half-texel convention).
pub fn upsample_bilinear(values: &[f64], s: usize, w: usize, h: usize) -> Vec<f64> {
    upsample_bilinear_grid(values, s, s, w, h)
}

/// Rectangular-grid variant of [`upsample_bilinear`].
pub fn upsample_bilinear_grid(values: &[f64], gw: usize, gh: usize, w: usize, h: usize) -> Vec<f64> {
    debug_assert_eq!(values.len(), gw * gh);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let v = (y as f64 + 0.5) * gh as f64 / h as f64 - 0.5;
        let vc = v.clamp(0.0, (gh - 1) as f64);
        let y0 = vc.floor() as usize;
        let y1 = (y0 + 1).min(gh - 1);
        let fy = vc - y0 as f64;
        for x in 0..w {
            let u = (x as f64 + 0.5) * gw as f64 / w as f64 - 0.5;
            let uc = u.clamp(0.0, (gw - 1) as f64);
            let x0 = uc.floor() as usize;
            let x1 = (x0 + 1).min(gw - 1);
            let fx = uc - x0 as f64;
            out[y * w + x] =
                (1.0 - fy) * ((1.0 - fx) * values[y0 * gw + x0] + fx * values[y0 * gw + x1])
                    + fy * ((1.0 - fx) * values[y1 * gw + x0] + fx * values[y1 * gw + x1]);
        }
    }
    out
}
