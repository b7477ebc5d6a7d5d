//! Bjøntegaard delta rate between two rate-distortion curves.
//!
//! log10(rate) is fitted as a cubic polynomial in quality per curve; the
//! fitted curves are integrated over the overlapping quality interval and
//! the mean log-rate difference maps to a percentage through 10^delta.

use super::{RDCurve, RDPoint};
use crate::error::{Error, Result};
use crate::math::det_pow10;

/// Cubic in (q - center), fitted by least squares.
struct CenteredCubic {
    center: f64,
    coefs: [f64; 4],
}

impl CenteredCubic {
    /// Definite integral over [lo, hi].
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let anti = |q: f64| {
            let t = q - self.center;
            t * (self.coefs[0]
                + t * (self.coefs[1] / 2.0 + t * (self.coefs[2] / 3.0 + t * self.coefs[3] / 4.0)))
        };
        anti(hi) - anti(lo)
    }
}

fn solve4(mut a: [[f64; 5]; 4]) -> Result<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        if a[col][col].abs() < 1e-300 {
            return Err(Error::InvalidConfig("degenerate curve fit".into()));
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            for k in col..5 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    Ok([
        a[0][4] / a[0][0],
        a[1][4] / a[1][1],
        a[2][4] / a[2][2],
        a[3][4] / a[3][3],
    ])
}

fn fit_log_rate(points: &[RDPoint]) -> Result<CenteredCubic> {
    let center = points.iter().map(|p| p.quality).sum::<f64>() / points.len() as f64;
    // normal equations for the centered Vandermonde basis
    let mut moments = [0.0f64; 7];
    let mut rhs = [0.0f64; 4];
    for p in points {
        let t = p.quality - center;
        let y = p.rate_kbps.log10();
        let mut tp = 1.0;
        for (k, m) in moments.iter_mut().enumerate() {
            *m += tp;
            if k < 4 {
                rhs[k] += y * tp;
            }
            tp *= t;
        }
    }
    let mut a = [[0.0f64; 5]; 4];
    for (r, row) in a.iter_mut().enumerate() {
        for c in 0..4 {
            row[c] = moments[r + c];
        }
        row[4] = rhs[r];
    }
    Ok(CenteredCubic {
        center,
        coefs: solve4(a)?,
    })
}

fn quality_bounds(curve: &RDCurve) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in curve.points() {
        lo = lo.min(p.quality);
        hi = hi.max(p.quality);
    }
    (lo, hi)
}

/// BD-rate of `test` against `anchor`, in percent. Negative means the test
/// curve spends less rate at equal quality.
pub fn bd_rate(test: &RDCurve, anchor: &RDCurve) -> Result<f64> {
    if test.metric() != anchor.metric() {
        return Err(Error::InvalidConfig("curves use different metrics".into()));
    }
    if test.points().len() < 4 || anchor.points().len() < 4 {
        return Err(Error::InvalidConfig(
            "BD-rate needs at least 4 points per curve".into(),
        ));
    }
    let (t_lo, t_hi) = quality_bounds(test);
    let (a_lo, a_hi) = quality_bounds(anchor);
    let lo = t_lo.max(a_lo);
    let hi = t_hi.min(a_hi);
    if !(hi > lo) {
        return Err(Error::InvalidConfig(
            "curves have no overlapping quality interval".into(),
        ));
    }
    let fit_test = fit_log_rate(test.points())?;
    let fit_anchor = fit_log_rate(anchor.points())?;
    let delta = (fit_test.integral(lo, hi) - fit_anchor.integral(lo, hi)) / (hi - lo);
    Ok((det_pow10(delta) - 1.0) * 100.0)
}

/// Fit-free reference: integrate the piecewise-linear interpolant of the
/// sampled (quality, log10 rate) points over [lo, hi] exactly. Used by the
/// oracle tests to bound the cubic fit.
pub fn bd_rate_piecewise_linear(test: &RDCurve, anchor: &RDCurve) -> Result<f64> {
    let (t_lo, t_hi) = quality_bounds(test);
    let (a_lo, a_hi) = quality_bounds(anchor);
    let lo = t_lo.max(a_lo);
    let hi = t_hi.min(a_hi);
    if !(hi > lo) {
        return Err(Error::InvalidConfig("no overlap".into()));
    }
    let integral = |curve: &RDCurve| -> f64 {
        let mut pts: Vec<(f64, f64)> = curve
            .points()
            .iter()
            .map(|p| (p.quality, p.rate_kbps.log10()))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut acc = 0.0;
        for pair in pts.windows(2) {
            let (q0, y0) = pair[0];
            let (q1, y1) = pair[1];
            let a = q0.max(lo);
            let b = q1.min(hi);
            if b <= a || q1 == q0 {
                continue;
            }
            let ya = y0 + (y1 - y0) * (a - q0) / (q1 - q0);
            let yb = y0 + (y1 - y0) * (b - q0) / (q1 - q0);
            acc += 0.5 * (ya + yb) * (b - a);
        }
        acc
    };
    let delta = (integral(test) - integral(anchor)) / (hi - lo);
    Ok((det_pow10(delta) - 1.0) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::MetricId;
    use crate::math::SplitMix64;

    fn curve(points: Vec<(f64, f64)>) -> RDCurve {
        RDCurve::new(
            MetricId::Psnr,
            points
                .into_iter()
                .map(|(rate_kbps, quality)| RDPoint { rate_kbps, quality })
                .collect(),
        )
        .unwrap()
    }

    fn sample_curve() -> RDCurve {
        curve(vec![(10.0, 30.0), (20.0, 33.5), (40.0, 36.0), (80.0, 38.2), (160.0, 39.9)])
    }

    #[test]
    fn identical_curves_have_exactly_zero_bd_rate() {
        let a = sample_curve();
        let b = sample_curve();
        assert_eq!(bd_rate(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn doubled_rate_is_plus_one_hundred_percent() {
        let anchor = sample_curve();
        let doubled = curve(
            anchor
                .points()
                .iter()
                .map(|p| (p.rate_kbps * 2.0, p.quality))
                .collect(),
        );
        let bd = bd_rate(&doubled, &anchor).unwrap();
        assert!((bd - 100.0).abs() <= 0.01, "bd={bd}");
        let bd_rev = bd_rate(&anchor, &doubled).unwrap();
        assert!((bd_rev + 50.0).abs() <= 0.01, "bd_rev={bd_rev}");
    }

    #[test]
    fn reversal_identity_on_monotone_curves() {
        let a = sample_curve();
        let b = curve(vec![(8.0, 29.0), (18.0, 33.0), (36.0, 35.8), (70.0, 38.0), (150.0, 39.5)]);
        let ab = bd_rate(&a, &b).unwrap();
        let ba = bd_rate(&b, &a).unwrap();
        let product = (1.0 + ab / 100.0) * (1.0 + ba / 100.0);
        assert!((product - 1.0).abs() < 0.005, "product={product}");
    }

    #[test]
    fn cubic_fit_matches_dense_piecewise_linear_oracle() {
        // random near-cubic monotone curves, sampled densely
        let mut rng = SplitMix64::new(2718);
        for trial in 0..20 {
            let gen_curve = |rng: &mut SplitMix64| {
                let c0 = rng.next_range(0.5, 1.5);
                let slope = rng.next_range(0.05, 0.12);
                let curv = rng.next_range(-0.004, 0.004);
                let cube = rng.next_range(-0.0002, 0.0002);
                let pts: Vec<(f64, f64)> = (0..48)
                    .map(|i| {
                        let q = 30.0 + 12.0 * i as f64 / 47.0;
                        let t = q - 36.0;
                        let log_rate = c0 + slope * t + curv * t * t + cube * t * t * t;
                        (det_pow10(log_rate), q)
                    })
                    .collect();
                curve(pts)
            };
            let a = gen_curve(&mut rng);
            let b = gen_curve(&mut rng);
            let fitted = bd_rate(&a, &b).unwrap();
            let oracle = bd_rate_piecewise_linear(&a, &b).unwrap();
            assert!(
                (fitted - oracle).abs() <= 0.1,
                "trial {trial}: fitted {fitted:.4} vs oracle {oracle:.4}"
            );
        }
    }

    #[test]
    fn too_few_points_or_no_overlap_error() {
        let short = curve(vec![(1.0, 30.0), (2.0, 31.0), (3.0, 32.0)]);
        let full = sample_curve();
        assert!(bd_rate(&short, &full).is_err());
        let far = curve(vec![(1.0, 80.0), (2.0, 81.0), (3.0, 82.0), (4.0, 83.0)]);
        assert!(bd_rate(&far, &full).is_err());
    }
}
