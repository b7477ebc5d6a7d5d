//! Gaussian-conditional probability model over integer bins.
//!
//! Bin k carries the normal mass on [k-0.5, k+0.5) for the given (mu,
//! sigma); two escape bins aggregate the tails beyond +-`BIN_RANGE` and are
//! followed by a raw 16-bit literal. Masses are quantized to a fixed-point
//! table summing exactly 2^16 with a floor of 1 per bin, so any symbol
//! remains decodable and the table is identical on every platform.

use super::range::{RangeDecoder, RangeEncoder, MAX_TOTAL};
use crate::error::{Error, Result};
use crate::math::normal_cdf;

/// Largest coded bin magnitude; values beyond escape to a literal.
pub const BIN_RANGE: i64 = 255;
/// Lower clamp on sigma.
pub const SIGMA_MIN: f64 = 0.1;

const REGULAR_BINS: usize = (2 * BIN_RANGE + 1) as usize;
const TABLE_LEN: usize = REGULAR_BINS + 2;
const ESCAPE_LOW: usize = 0;
const ESCAPE_HIGH: usize = TABLE_LEN - 1;

/// Fixed-point Gaussian bin table (probabilities in 1/2^16 units).
#[derive(Debug, Clone)]
pub struct GaussianBinModel {
    /// Cumulative table: cum[i+1] - cum[i] is entry i's probability.
    cum: Vec<u32>,
}

/// Real-valued mass of integer bin k before fixed-point quantization.
pub fn gaussian_bin_mass(mu: f64, sigma: f64, k: i64) -> f64 {
    let s = sigma.max(SIGMA_MIN);
    normal_cdf((k as f64 + 0.5 - mu) / s) - normal_cdf((k as f64 - 0.5 - mu) / s)
}

/// Fixed-point probability (in 1/2^16 units) of integer bin k.
pub fn gaussian_bin_probability(mu: f64, sigma: f64, k: i64) -> u32 {
    GaussianBinModel::new(mu, sigma).bin_probability(k)
}

impl GaussianBinModel {
    pub fn new(mu: f64, sigma: f64) -> Self {
        let s = sigma.max(SIGMA_MIN);
        // CDF at the 512 bin boundaries -255.5 .. 255.5
        let mut cdf = [0.0f64; REGULAR_BINS + 1];
        for (i, c) in cdf.iter_mut().enumerate() {
            let boundary = -(BIN_RANGE as f64) - 0.5 + i as f64;
            *c = normal_cdf((boundary - mu) / s);
        }
        let mut mass = [0.0f64; TABLE_LEN];
        mass[ESCAPE_LOW] = cdf[0];
        for i in 0..REGULAR_BINS {
            mass[1 + i] = (cdf[i + 1] - cdf[i]).max(0.0);
        }
        mass[ESCAPE_HIGH] = (1.0 - cdf[REGULAR_BINS]).max(0.0);

        // Quantize with one unit reserved per entry, then distribute the
        // leftover by largest remainder. Ties prefer the entry closest to
        // the mean so tables stay monotone away from the mu bin.
        let budget = MAX_TOTAL - TABLE_LEN as u32;
        let mu_idx = (mu.round().clamp(-(BIN_RANGE as f64), BIN_RANGE as f64) as i64
            + BIN_RANGE
            + 1) as usize;
        let mut base = [0u32; TABLE_LEN];
        let mut assigned: i64 = 0;
        let mut order: Vec<(f64, usize, usize)> = Vec::with_capacity(TABLE_LEN);
        for i in 0..TABLE_LEN {
            let scaled = mass[i] * budget as f64;
            let fl = scaled.floor();
            base[i] = fl as u32;
            assigned += fl as i64;
            order.push((scaled - fl, i.abs_diff(mu_idx), i));
        }
        let mut leftover = budget as i64 - assigned;
        while leftover < 0 {
            // float-rounding overshoot; shave the largest entry
            let imax = (0..TABLE_LEN).max_by_key(|&i| base[i]).unwrap();
            base[imax] -= 1;
            leftover += 1;
        }
        order.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        for &(_, _, i) in order.iter().take(leftover as usize) {
            base[i] += 1;
        }

        let mut cum = Vec::with_capacity(TABLE_LEN + 1);
        let mut acc = 0u32;
        cum.push(0);
        for b in base {
            acc += 1 + b;
            cum.push(acc);
        }
        debug_assert_eq!(acc, MAX_TOTAL);
        Self { cum }
    }

    fn entry_probability(&self, idx: usize) -> u32 {
        self.cum[idx + 1] - self.cum[idx]
    }

    pub fn bin_probability(&self, k: i64) -> u32 {
        let idx = if k < -BIN_RANGE {
            ESCAPE_LOW
        } else if k > BIN_RANGE {
            ESCAPE_HIGH
        } else {
            (k + BIN_RANGE + 1) as usize
        };
        self.entry_probability(idx)
    }

    pub fn total(&self) -> u32 {
        MAX_TOTAL
    }

    /// Information content in bits of coding `value` under this table
    /// (including the 16 literal bits an escape spends).
    pub fn self_information_bits(&self, value: i64) -> f64 {
        let p = self.bin_probability(value) as f64 / MAX_TOTAL as f64;
        let escape = if value.abs() > BIN_RANGE { 16.0 } else { 0.0 };
        -p.log2() + escape
    }

    pub fn encode(&self, enc: &mut RangeEncoder, value: i64) -> Result<()> {
        if !(-32768..=32767).contains(&value) {
            return Err(Error::SymbolOutOfRange {
                symbol: value,
                alphabet: 65536,
            });
        }
        let idx = if value < -BIN_RANGE {
            ESCAPE_LOW
        } else if value > BIN_RANGE {
            ESCAPE_HIGH
        } else {
            (value + BIN_RANGE + 1) as usize
        };
        enc.encode(self.cum[idx], self.entry_probability(idx), MAX_TOTAL);
        if idx == ESCAPE_LOW || idx == ESCAPE_HIGH {
            enc.encode_literal_u16(value as i16 as u16);
        }
        Ok(())
    }

    pub fn decode(&self, dec: &mut RangeDecoder) -> Result<i64> {
        let target = dec.decode_target(MAX_TOTAL);
        // binary search the cumulative table
        let idx = match self.cum.binary_search(&target) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let idx = idx.min(TABLE_LEN - 1);
        dec.advance(self.cum[idx], self.entry_probability(idx), MAX_TOTAL)?;
        if idx == ESCAPE_LOW || idx == ESCAPE_HIGH {
            return Ok(dec.decode_literal_u16()? as i16 as i64);
        }
        Ok(idx as i64 - BIN_RANGE - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SplitMix64;

    #[test]
    fn central_bin_mass_matches_erf_oracle() {
        // Phi(0.5) - Phi(-0.5)
        let m = gaussian_bin_mass(0.0, 1.0, 0);
        assert!((m - 0.38292).abs() < 2e-5, "mass={m}");
    }

    #[test]
    fn masses_are_symmetric_around_zero_mean() {
        for sigma in [0.1, 0.5, 1.0, 7.0] {
            for k in 0..20 {
                let a = gaussian_bin_mass(0.0, sigma, k);
                let b = gaussian_bin_mass(0.0, sigma, -k);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn table_sums_to_exactly_two_pow_16_with_floor_one() {
        for (mu, sigma) in [
            (0.0, 0.1),
            (0.0, 1.0),
            (3.2, 0.35),
            (-17.8, 4.0),
            (100.0, 300.0),
            (-400.0, 2.0), // mean outside the bin range
        ] {
            let model = GaussianBinModel::new(mu, sigma);
            let mut total = 0u64;
            let mut min_p = u32::MAX;
            for i in 0..TABLE_LEN {
                let p = model.entry_probability(i);
                total += p as u64;
                min_p = min_p.min(p);
            }
            assert_eq!(total, 1 << 16, "mu={mu} sigma={sigma}");
            assert!(min_p >= 1);
        }
    }

    #[test]
    fn tables_are_monotone_away_from_the_mean_bin() {
        for (mu, sigma) in [(0.0, 0.1), (0.0, 2.0), (12.4, 0.6), (-100.2, 40.0), (0.3, 500.0)] {
            let model = GaussianBinModel::new(mu, sigma);
            let mu_bin = mu.round().clamp(-(BIN_RANGE as f64), BIN_RANGE as f64) as i64;
            let mut prev = model.bin_probability(mu_bin);
            let mut k = mu_bin + 1;
            while k <= BIN_RANGE {
                let p = model.bin_probability(k);
                assert!(p <= prev, "rise at k={k} (mu={mu} sigma={sigma})");
                prev = p;
                k += 1;
            }
            let mut prev = model.bin_probability(mu_bin);
            let mut k = mu_bin - 1;
            while k >= -BIN_RANGE {
                let p = model.bin_probability(k);
                assert!(p <= prev, "rise at k={k} (mu={mu} sigma={sigma})");
                prev = p;
                k -= 1;
            }
        }
    }

    #[test]
    fn sigma_below_floor_is_clamped_not_rejected() {
        let narrow = GaussianBinModel::new(0.0, 1e-9);
        let reference = GaussianBinModel::new(0.0, SIGMA_MIN);
        for k in -3..=3 {
            assert_eq!(narrow.bin_probability(k), reference.bin_probability(k));
        }
    }

    #[test]
    fn escape_values_round_trip() {
        let model = GaussianBinModel::new(0.0, 2.0);
        let values = [0i64, 1, -1, 255, -255, 256, -256, 3000, -32768, 32767];
        let mut enc = RangeEncoder::new();
        for &v in &values {
            model.encode(&mut enc, v).unwrap();
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        for &v in &values {
            assert_eq!(model.decode(&mut dec).unwrap(), v);
        }
    }

    #[test]
    fn randomized_per_symbol_models_round_trip() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..50 {
            let count = 1 + rng.next_below(64) as usize;
            let models: Vec<GaussianBinModel> = (0..count)
                .map(|_| {
                    GaussianBinModel::new(rng.next_range(-30.0, 30.0), rng.next_range(0.05, 40.0))
                })
                .collect();
            let symbols: Vec<i64> = (0..count)
                .map(|_| rng.next_below(1001) as i64 - 500)
                .collect();
            let mut enc = RangeEncoder::new();
            for (m, &s) in models.iter().zip(&symbols) {
                m.encode(&mut enc, s).unwrap();
            }
            let bytes = enc.finish();
            let mut dec = RangeDecoder::new(&bytes).unwrap();
            for (m, &s) in models.iter().zip(&symbols) {
                assert_eq!(m.decode(&mut dec).unwrap(), s);
            }
        }
    }
}
