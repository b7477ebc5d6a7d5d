//! Deterministic scalar math used in coding-critical paths.
//!
//! Everything that influences coded bitstreams or synthetic data must be
//! bit-identical across platforms, so `exp`, `erf` and the normal CDF are
//! evaluated with fixed polynomial/rational approximations instead of libm,
//! and randomness comes from a SplitMix-style integer generator.

/// log2(e)
const LOG2E: f64 = 1.442_695_040_888_963_4;
/// High/low split of ln(2) for argument reduction.
const LN2_HI: f64 = 6.931_457_519_531_25e-1;
const LN2_LO: f64 = 1.428_606_820_309_417_232_1e-6;

const EXP_P: [f64; 3] = [
    1.261_771_930_748_105_908_78e-4,
    3.029_944_077_074_419_613e-2,
    9.999_999_999_999_999_999_1e-1,
];
const EXP_Q: [f64; 4] = [
    3.001_985_051_386_644_550_42e-6,
    2.524_483_403_496_841_041_92e-3,
    2.272_655_482_081_550_287_66e-1,
    2.000_000_000_000_000_000_05,
];

fn polevl(x: f64, coefs: &[f64]) -> f64 {
    let mut acc = coefs[0];
    for c in &coefs[1..] {
        acc = acc * x + *c;
    }
    acc
}

/// Multiply by 2^n through exponent-bit arithmetic.
fn ldexp(x: f64, n: i32) -> f64 {
    debug_assert!((-1021..=1021).contains(&n));
    f64::from_bits(((1023 + n) as u64) << 52) * x
}

/// e^x with a fixed rational approximation (accurate to ~1 ulp).
///
/// Arguments below -700 flush to zero and above +700 to infinity; both ends
/// are far outside the ranges used by the entropy models and filters.
pub fn det_exp(x: f64) -> f64 {
    if x != x {
        return f64::NAN;
    }
    if x < -700.0 {
        return 0.0;
    }
    if x > 700.0 {
        return f64::INFINITY;
    }
    let px = (LOG2E * x + 0.5).floor();
    let n = px as i32;
    let r = x - px * LN2_HI - px * LN2_LO;
    let rr = r * r;
    let p = r * polevl(rr, &EXP_P);
    let e = 1.0 + 2.0 * p / (polevl(rr, &EXP_Q) - p);
    ldexp(e, n)
}

/// 10^x, deterministic (used by the Bjøntegaard delta computation).
pub fn det_pow10(x: f64) -> f64 {
    det_exp(x * std::f64::consts::LN_10)
}

const ERF_P: f64 = 0.327_591_1;
const ERF_A: [f64; 5] = [
    0.254_829_592,
    -0.284_496_736,
    1.421_413_741,
    -1.453_152_027,
    1.061_405_429,
];

/// Error function via the Abramowitz–Stegun 7.1.26 rational approximation
/// (|error| <= 1.5e-7 over the real line).
pub fn det_erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let t = 1.0 / (1.0 + ERF_P * ax);
    let poly = t * (ERF_A[0] + t * (ERF_A[1] + t * (ERF_A[2] + t * (ERF_A[3] + t * ERF_A[4]))));
    sign * (1.0 - poly * det_exp(-ax * ax))
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + det_erf(z * std::f64::consts::FRAC_1_SQRT_2))
}

/// SplitMix-style 64-bit generator: one additive state step plus a fixed
/// mixing function, so sequences are identical on every platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 significant bits; exact in f64.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n) without floating point.
    pub fn next_below(&mut self, n: u64) -> u64 {
        ((self.next_u64() >> 32).wrapping_mul(n)) >> 32
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
