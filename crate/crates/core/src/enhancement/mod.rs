//! Enhancement layer: multi-granularity auxiliary features, their
//! hyperprior/causal-context entropy coding, recalibration of the base
//! reconstruction and coarse-to-fine composition.

mod features;
mod generate;

pub use features::{
    decode_feature, encode_feature, extract_feature, feature_checksum, predict_sigma,
    KAPPA_PER_GRADIENT, SIGMA_FLOOR_SYMBOLS,
};
pub use generate::{compose_fine, recalibrate, refine_motion, GAIN_CLAMP, GAIN_EPSILON};

use crate::error::{Error, Result};

/// Granularity sides supported by the enhancement layer.
pub const GRANULARITY_SIDES: [usize; 3] = [8, 16, 32];

/// Informational rate-distortion weights associated with each granularity
/// (metadata only; no training happens here).
pub const GRANULARITY_LAMBDA: [f64; 3] = [64.0, 268.0, 1500.0];

/// Level id 0/1/2 mapped one-to-one onto feature sides 8/16/32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GranularityLevel(u8);

impl GranularityLevel {
    pub fn from_id(id: u8) -> Result<Self> {
        if id > 2 {
            return Err(Error::UnsupportedGranularity { side: id as usize });
        }
        Ok(Self(id))
    }

    pub fn from_side(side: usize) -> Result<Self> {
        match GRANULARITY_SIDES.iter().position(|&s| s == side) {
            Some(i) => Ok(Self(i as u8)),
            None => Err(Error::UnsupportedGranularity { side }),
        }
    }

    pub fn id(&self) -> u8 {
        self.0
    }

    pub fn side(&self) -> usize {
        GRANULARITY_SIDES[self.0 as usize]
    }

    pub fn lambda(&self) -> f64 {
        GRANULARITY_LAMBDA[self.0 as usize]
    }

    pub fn all() -> [GranularityLevel; 3] {
        [Self(0), Self(1), Self(2)]
    }
}

/// An `s`x`s` grid of real values in [0, 255]: the auxiliary signal one
/// enhancement level carries for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    side: usize,
    values: Vec<f64>,
}

impl FeatureMap {
    pub fn validate_side(side: usize) -> Result<()> {
        if GRANULARITY_SIDES.contains(&side) {
            Ok(())
        } else {
            Err(Error::UnsupportedGranularity { side })
        }
    }

    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        Self::validate_side(side)?;
        if values.len() != side * side {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", side * side),
                got: format!("{}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite feature value".into()));
        }
        Ok(Self { side, values })
    }

    pub fn constant(side: usize, v: f64) -> Result<Self> {
        Self::new(side, vec![v; side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.side + ix]
    }
}

/// Quantized feature-residual symbols plus the gain that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedFeature {
    pub side: usize,
    pub symbols: Vec<i64>,
    pub gain: f64,
}
