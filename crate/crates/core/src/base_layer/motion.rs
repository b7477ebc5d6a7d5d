//! Dense motion synthesis from sparse keypoints.

use super::KeypointSet;
use crate::error::{Error, Result};
use crate::math::det_exp;
use crate::media::{warp_bilinear, Frame, MotionField};

/// The background weight is e^-2: far from every keypoint the field decays
/// to zero displacement.
pub const BACKGROUND_WEIGHT_EXPONENT: f64 = -2.0;

/// Gaussian-kernel interpolation of keypoint displacements into a dense
/// backward field.
///
/// At pixel p the displacement is sum_n w_n(p) (P_ref,n - P_cur,n) with
/// w_n(p) = e_n / (w_bg + sum_m e_m), e_n = exp(-|p - P_cur,n|^2 / (2 tau^2))
/// and w_bg = e^-2, all positions in pixel units.
pub fn dense_motion_from_keypoints(
    kp_ref: &KeypointSet,
    kp_cur: &KeypointSet,
    tau: f64,
    width: usize,
    height: usize,
) -> Result<MotionField> {
    if kp_ref.len() != kp_cur.len() {
        return Err(Error::KeypointCountMismatch {
            a: kp_ref.len(),
            b: kp_cur.len(),
        });
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig("kernel bandwidth tau must be > 0".into()));
    }
    let mut field = MotionField::zero(width, height);
    if kp_ref.is_empty() {
        return Ok(field);
    }
    let w_bg = det_exp(BACKGROUND_WEIGHT_EXPONENT);
    let inv_two_tau2 = 1.0 / (2.0 * tau * tau);
    // displacements and current positions in pixels
    let points: Vec<(f64, f64, f64, f64)> = kp_ref
        .points()
        .iter()
        .zip(kp_cur.points())
        .map(|(&(rx, ry), &(cx, cy))| {
            (
                cx * width as f64,
                cy * height as f64,
                (rx - cx) * width as f64,
                (ry - cy) * height as f64,
            )
        })
        .collect();
    for y in 0..height {
        for x in 0..width {
            let px = x as f64;
            let py = y as f64;
            let mut total = w_bg;
            let mut dx = 0.0;
            let mut dy = 0.0;
            for &(cx, cy, mx, my) in &points {
                let dist2 = (px - cx) * (px - cx) + (py - cy) * (py - cy);
                let e = det_exp(-dist2 * inv_two_tau2);
                total += e;
                dx += e * mx;
                dy += e * my;
            }
            #[cfg(debug_assertions)]
            {
                // normalized keypoint weights plus the background fraction
                // must partition unity
                let kp_weight_sum = (total - w_bg) / total;
                let bg_fraction = w_bg / total;
                debug_assert!((kp_weight_sum + bg_fraction - 1.0).abs() <= 1e-6);
            }
            field.set(x, y, dx / total, dy / total);
        }
    }
    Ok(field)
}

/// Base-layer frame synthesis: warp the reconstructed key-reference frame
/// by the dense field between its keypoints and the current frame's.
pub fn synthesize_base(
    key_recon: &Frame,
    kp_key: &KeypointSet,
    kp_cur: &KeypointSet,
    tau: f64,
) -> Result<Frame> {
    let field = dense_motion_from_keypoints(kp_key, kp_cur, tau, key_recon.width(), key_recon.height())?;
    warp_bilinear(key_recon, &field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_keypoints_give_zero_field() {
        let kp = KeypointSet::new(vec![(0.3, 0.4), (0.7, 0.6)]).unwrap();
        let field = dense_motion_from_keypoints(&kp, &kp, 24.0, 64, 64).unwrap();
        assert_eq!(field.max_magnitude(), 0.0);
    }

    #[test]
    fn no_keypoints_give_pure_background() {
        let field = dense_motion_from_keypoints(
            &KeypointSet::empty(),
            &KeypointSet::empty(),
            24.0,
            32,
            32,
        )
        .unwrap();
        assert_eq!(field.max_magnitude(), 0.0);
    }

    #[test]
    fn single_keypoint_weight_matches_closed_form() {
        // one keypoint displaced by (5, 0) px on a 100x100 frame; at the
        // keypoint itself the kernel weight is 1/(1 + e^-2)
        let kp_cur = KeypointSet::new(vec![(0.5, 0.5)]).unwrap();
        let kp_ref = KeypointSet::new(vec![(0.55, 0.5)]).unwrap();
        let field = dense_motion_from_keypoints(&kp_ref, &kp_cur, 24.0, 100, 100).unwrap();
        let (dx, dy) = field.at(50, 50);
        let expected = 5.0 / (1.0 + det_exp(-2.0));
        assert!((dx - expected).abs() < 1e-9, "dx={dx} expected={expected}");
        assert!((dx - 4.40).abs() < 5e-3);
        assert_eq!(dy, 0.0);
    }

    #[test]
    fn mismatched_counts_error() {
        let a = KeypointSet::new(vec![(0.5, 0.5)]).unwrap();
        let b = KeypointSet::new(vec![(0.5, 0.5), (0.2, 0.2)]).unwrap();
        assert!(dense_motion_from_keypoints(&a, &b, 24.0, 8, 8).is_err());
    }

    #[test]
    fn synthesis_with_static_keypoints_returns_key_frame() {
        let key = Frame::filled(32, 32, [10, 20, 30]).unwrap();
        let kp = KeypointSet::new(vec![(0.25, 0.25), (0.75, 0.75)]).unwrap();
        let out = synthesize_base(&key, &kp, &kp, 24.0).unwrap();
        assert_eq!(out, key);
    }
}
