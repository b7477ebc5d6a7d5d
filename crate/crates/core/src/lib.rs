//! Scalable two-layer video codec toolkit.
//!
//! The base layer codes a key-reference frame with a block-DCT intra codec
//! and every other frame as a compact set of keypoints driving dense-motion
//! synthesis, reaching very low rates. Enhancement layers add per-frame
//! auxiliary feature maps at 8x8/16x16/32x32 granularity, entropy-coded
//! with a Gaussian-conditional model whose sigma comes from the base layer
//! (no side bits) and whose mu comes from causal context. The decoder
//! recalibrates the base reconstruction with the decoded features and then
//! re-estimates motion against the key frame for the final composition.
//! Layered `.pgen` streams can be truncated to any layer subset after
//! encoding; the evaluation module provides PSNR/SSIM, rate accounting and
//! Bjøntegaard-delta-rate for RD sweeps.

pub mod base_layer;
pub mod codec;
pub mod container;
pub mod enhancement;
pub mod entropy;
pub mod error;
pub mod eval;
pub mod math;
pub mod media;
pub(crate) mod wire;

pub use error::{Error, Result};
