//! Auxiliary-feature extraction and its conditional entropy codec.
//!
//! The residual against the decoder-side base feature is quantized and
//! range-coded in raster order. Each symbol's Gaussian is parameterized by
//! sigma predicted from the base feature alone (side information costing no
//! bits) and mu from the mean of the already-decoded left/top neighbors.

use super::FeatureMap;
use crate::entropy::{GaussianBinModel, RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};
use crate::media::{downsample_band_limited, Frame};

/// Sigma floor, in symbol units.
pub const SIGMA_FLOOR_SYMBOLS: f64 = 0.5;
/// Sigma gained per unit of local base-feature gradient.
pub const KAPPA_PER_GRADIENT: f64 = 0.25;

/// Band-limited luminance downsample of the original frame: the auxiliary
/// signal the enhancement layer transmits.
pub fn extract_feature(original: &Frame, side: usize) -> Result<FeatureMap> {
    downsample_band_limited(original, side)
}

/// Per-cell sigma from the base feature's mean absolute difference to its
/// 4-neighbors (edge-replicated): sigma = floor + kappa * gradient. A pure
/// function of decoder-side data, identical at both ends.
pub fn predict_sigma(base_feature: &FeatureMap) -> Vec<f64> {
    let s = base_feature.side();
    let at = |x: isize, y: isize| {
        let xi = x.clamp(0, s as isize - 1) as usize;
        let yi = y.clamp(0, s as isize - 1) as usize;
        base_feature.at(xi, yi)
    };
    let mut out = Vec::with_capacity(s * s);
    for y in 0..s as isize {
        for x in 0..s as isize {
            let center = at(x, y);
            let grad = ((at(x - 1, y) - center).abs()
                + (at(x + 1, y) - center).abs()
                + (at(x, y - 1) - center).abs()
                + (at(x, y + 1) - center).abs())
                / 4.0;
            out.push(SIGMA_FLOOR_SYMBOLS + KAPPA_PER_GRADIENT * grad);
        }
    }
    out
}

/// 16-bit integrity checksum over a feature map, carried next to each
/// enhancement payload so base-layer divergence between encoder and decoder
/// is caught instead of silently mis-decoding.
pub fn feature_checksum(map: &FeatureMap) -> u16 {
    let mut h: u32 = map.side() as u32;
    for &v in map.values() {
        let q = (v * 16.0).round() as i64 as u32;
        h = h.wrapping_mul(31).wrapping_add(q) % 65_521;
    }
    h as u16
}

fn causal_mu(symbols: &[i64], side: usize, x: usize, y: usize) -> f64 {
    let mut sum = 0.0;
    let mut n = 0.0;
    if x > 0 {
        sum += symbols[y * side + x - 1] as f64;
        n += 1.0;
    }
    if y > 0 {
        sum += symbols[(y - 1) * side + x] as f64;
        n += 1.0;
    }
    if n == 0.0 {
        0.0
    } else {
        sum / n
    }
}

/// Encode a feature map against the base feature with residual gain
/// `q_gain` (symbols per feature unit).
pub fn encode_feature(
    feature: &FeatureMap,
    base_feature: &FeatureMap,
    q_gain: f64,
) -> Result<Vec<u8>> {
    if feature.side() != base_feature.side() {
        return Err(Error::DimensionMismatch {
            expected: format!("side {}", base_feature.side()),
            got: format!("side {}", feature.side()),
        });
    }
    if !(q_gain > 0.0) {
        return Err(Error::InvalidConfig("feature quantizer gain must be > 0".into()));
    }
    let s = feature.side();
    let sigmas = predict_sigma(base_feature);
    let mut enc = RangeEncoder::new();
    let mut symbols = vec![0i64; s * s];
    for y in 0..s {
        for x in 0..s {
            let i = y * s + x;
            let residual = feature.values()[i] - base_feature.values()[i];
            let symbol = (residual * q_gain).round() as i64;
            let model = GaussianBinModel::new(causal_mu(&symbols, s, x, y), sigmas[i]);
            model.encode(&mut enc, symbol)?;
            symbols[i] = symbol;
        }
    }
    Ok(enc.finish())
}

/// Decode a feature payload given the decoder's own base feature. The
/// reconstruction is clamp(base + symbol/q_gain, 0, 255) per cell.
pub fn decode_feature(bytes: &[u8], base_feature: &FeatureMap, q_gain: f64) -> Result<FeatureMap> {
    if !(q_gain > 0.0) {
        return Err(Error::InvalidConfig("feature quantizer gain must be > 0".into()));
    }
    let s = base_feature.side();
    let sigmas = predict_sigma(base_feature);
    let mut dec = RangeDecoder::new(bytes)?;
    let mut symbols = vec![0i64; s * s];
    let mut values = Vec::with_capacity(s * s);
    for y in 0..s {
        for x in 0..s {
            let i = y * s + x;
            let model = GaussianBinModel::new(causal_mu(&symbols, s, x, y), sigmas[i]);
            let symbol = model.decode(&mut dec)?;
            symbols[i] = symbol;
            values.push((base_feature.values()[i] + symbol as f64 / q_gain).clamp(0.0, 255.0));
        }
    }
    FeatureMap::new(s, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SplitMix64;
    use crate::media::Frame;

    fn feature_from(values: Vec<f64>, side: usize) -> FeatureMap {
        FeatureMap::new(side, values).unwrap()
    }

    #[test]
    fn constant_frame_extracts_constant_map() {
        let f = Frame::filled(64, 64, [50, 50, 50]).unwrap();
        let m = extract_feature(&f, 16).unwrap();
        assert!(m.values().iter().all(|v| (v - 50.0).abs() < 0.5));
    }

    #[test]
    fn requested_sides_come_back() {
        let f = Frame::filled(256, 256, [9, 9, 9]).unwrap();
        assert_eq!(extract_feature(&f, 32).unwrap().side(), 32);
        assert!(extract_feature(&f, 12).is_err());
    }

    #[test]
    fn pyramid_consistency_between_granularities() {
        // extracting at 16 then box-averaging to 8 matches extracting at 8
        let max_pyramid_gap = |f: &Frame| -> f64 {
            let fine = extract_feature(f, 16).unwrap();
            let coarse = extract_feature(f, 8).unwrap();
            let mut worst = 0.0f64;
            for y in 0..8 {
                for x in 0..8 {
                    let boxed = (fine.at(2 * x, 2 * y)
                        + fine.at(2 * x + 1, 2 * y)
                        + fine.at(2 * x, 2 * y + 1)
                        + fine.at(2 * x + 1, 2 * y + 1))
                        / 4.0;
                    worst = worst.max((boxed - coarse.at(x, y)).abs());
                }
            }
            worst
        };

        // smooth gradient: the bound holds per entry, boundaries included
        let mut data = vec![0u8; 3 * 256 * 256];
        for y in 0..256usize {
            for x in 0..256usize {
                data[y * 256 + x] = (120 + 44 * x / 255) as u8;
                data[65536 + y * 256 + x] = (120 + 44 * y / 255) as u8;
                data[2 * 65536 + y * 256 + x] = 142;
            }
        }
        let gradient = Frame::new(256, 256, data).unwrap();
        assert!(max_pyramid_gap(&gradient) <= 1.0);
    }

    #[test]
    fn sigma_of_constant_feature_is_the_floor() {
        let base = FeatureMap::constant(8, 42.0).unwrap();
        assert!(predict_sigma(&base).iter().all(|&s| s == SIGMA_FLOOR_SYMBOLS));
    }

    #[test]
    fn sigma_on_a_vertical_step_edge() {
        // left half 0, right half 8: a column at the edge has exactly one
        // differing neighbor out of four
        let mut values = vec![0.0; 64];
        for y in 0..8 {
            for x in 4..8 {
                values[y * 8 + x] = 8.0;
            }
        }
        let sig = predict_sigma(&feature_from(values, 8));
        let expected_edge = SIGMA_FLOOR_SYMBOLS + KAPPA_PER_GRADIENT * (8.0 / 4.0);
        assert!((sig[3] - expected_edge).abs() < 1e-12);
        assert!((sig[4] - expected_edge).abs() < 1e-12);
        assert_eq!(sig[0], SIGMA_FLOOR_SYMBOLS);
        assert_eq!(sig[7], SIGMA_FLOOR_SYMBOLS);
    }

    #[test]
    fn sigma_is_shift_invariant() {
        let mut rng = SplitMix64::new(4);
        let values: Vec<f64> = (0..256).map(|_| rng.next_range(0.0, 200.0)).collect();
        let a = predict_sigma(&feature_from(values.clone(), 16));
        let shifted: Vec<f64> = values.iter().map(|v| v + 30.0).collect();
        let b = predict_sigma(&feature_from(shifted, 16));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_residual_codes_within_the_entropy_budget() {
        let base = FeatureMap::constant(32, 100.0).unwrap();
        let bytes = encode_feature(&base, &base, 1.0).unwrap();
        // all-zero symbols under sigma = 0.5: p(0) = Phi(1) - Phi(-1)
        let p0 = crate::entropy::gaussian_bin_mass(0.0, SIGMA_FLOOR_SYMBOLS, 0);
        let budget = (1024.0 * -(p0.log2()) / 8.0) + 8.0;
        assert!(
            (bytes.len() as f64) <= budget,
            "payload {} budget {budget:.1}",
            bytes.len()
        );
        let decoded = decode_feature(&bytes, &base, 1.0).unwrap();
        assert_eq!(decoded, base);
    }

    #[test]
    fn round_trip_reproduces_symbols_and_halfstep_bound() {
        let mut rng = SplitMix64::new(8);
        for (side, q_gain) in [(8usize, 1.0f64), (16, 2.0), (32, 0.5)] {
            let base = feature_from(
                (0..side * side).map(|_| rng.next_range(0.0, 255.0)).collect(),
                side,
            );
            let feature = feature_from(
                (0..side * side).map(|_| rng.next_range(0.0, 255.0)).collect(),
                side,
            );
            let bytes = encode_feature(&feature, &base, q_gain).unwrap();
            let decoded = decode_feature(&bytes, &base, q_gain).unwrap();
            for ((d, s), b) in decoded.values().iter().zip(feature.values()).zip(base.values()) {
                // half-step bound holds wherever the reference clamp is inactive
                let unclamped = b + ((s - b) * q_gain).round() / q_gain;
                if (0.0..=255.0).contains(&unclamped) {
                    assert!(
                        (d - s).abs() <= 1.0 / (2.0 * q_gain) + 1e-9,
                        "side={side} q={q_gain}"
                    );
                }
            }
        }
    }

    #[test]
    fn finer_gain_halves_error_and_costs_more_bits() {
        let mut rng = SplitMix64::new(21);
        let side = 16;
        let base = feature_from(
            (0..side * side).map(|_| rng.next_range(60.0, 190.0)).collect(),
            side,
        );
        let feature = feature_from(
            base.values().iter().map(|v| (v + rng.next_range(-20.0, 20.0)).clamp(0.0, 255.0)).collect(),
            side,
        );
        let coarse_bytes = encode_feature(&feature, &base, 1.0).unwrap();
        let fine_bytes = encode_feature(&feature, &base, 2.0).unwrap();
        assert!(fine_bytes.len() > coarse_bytes.len());
        let coarse = decode_feature(&coarse_bytes, &base, 1.0).unwrap();
        let fine = decode_feature(&fine_bytes, &base, 2.0).unwrap();
        let err = |m: &FeatureMap| -> f64 {
            m.values()
                .iter()
                .zip(feature.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(&fine) <= 0.25 + 1e-9);
        assert!(err(&coarse) <= 0.5 + 1e-9);
    }

    #[test]
    fn mismatched_sides_are_rejected() {
        let a = FeatureMap::constant(8, 1.0).unwrap();
        let b = FeatureMap::constant(16, 1.0).unwrap();
        assert!(encode_feature(&a, &b, 1.0).is_err());
    }

    #[test]
    fn checksum_distinguishes_nearby_maps() {
        let a = FeatureMap::constant(8, 100.0).unwrap();
        let b = FeatureMap::constant(8, 100.25).unwrap();
        assert_ne!(feature_checksum(&a), feature_checksum(&b));
        assert_eq!(feature_checksum(&a), feature_checksum(&a.clone()));
    }
}
