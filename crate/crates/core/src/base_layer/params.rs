//! Closed-loop keypoint parameter codec.
//!
//! Frame 1 is predicted from the (header-transmitted, quantized) key-frame
//! keypoints; every later frame from the decoded keypoints of its
//! predecessor, so encoder and decoder tracks are bit-identical by
//! construction. Residuals are quantized by round(delta/qstep) and coded
//! with per-(axis, magnitude-class) adaptive contexts.

use super::{KeypointSet, KeypointTrack};
use crate::entropy::{AdaptiveModel, RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};
use crate::wire::{Reader, WriteLe};

/// Default residual quantizer: 1/256 of the normalized coordinate range.
pub const DEFAULT_QSTEP: f64 = 1.0 / 256.0;

const MAX_CLASS: usize = 17;
const TOKEN_ALPHABET: usize = 1 + 2 * MAX_CLASS;
// token contexts: coordinate axis x previous-magnitude bucket
const TOKEN_CONTEXTS: usize = 2 * 3;

fn validate_qstep(qstep: f64) -> Result<()> {
    if !(qstep > 0.0) || (1.0 / qstep).round() > u16::MAX as f64 {
        return Err(Error::InvalidConfig(format!("invalid qstep {qstep}")));
    }
    Ok(())
}

/// Quantize keypoints for header transmission.
pub fn quantize_keypoints(set: &KeypointSet, qstep: f64) -> Result<Vec<(u16, u16)>> {
    validate_qstep(qstep)?;
    Ok(set
        .points()
        .iter()
        .map(|&(x, y)| ((x / qstep).round() as u16, (y / qstep).round() as u16))
        .collect())
}

/// Invert [`quantize_keypoints`].
pub fn dequantize_keypoints(points: &[(u16, u16)], qstep: f64) -> Result<KeypointSet> {
    KeypointSet::new(
        points
            .iter()
            .map(|&(x, y)| (x as f64 * qstep, y as f64 * qstep))
            .collect(),
    )
}

fn magnitude_bucket(symbol: i64) -> usize {
    match symbol.unsigned_abs() {
        0 => 0,
        1..=2 => 1,
        _ => 2,
    }
}

struct ParamModels {
    tokens: AdaptiveModel,
    bits: AdaptiveModel,
}

impl ParamModels {
    fn new() -> Self {
        Self {
            tokens: AdaptiveModel::new(TOKEN_CONTEXTS, TOKEN_ALPHABET),
            bits: AdaptiveModel::new(1, 2),
        }
    }
}

struct LoopState {
    qstep: f64,
    /// decoded coordinates of the previous frame
    prev: Vec<(f64, f64)>,
    /// magnitude bucket of the previous symbol per (keypoint, axis)
    prev_bucket: Vec<(usize, usize)>,
}

impl LoopState {
    fn new(key: &KeypointSet, qstep: f64) -> Result<Self> {
        validate_qstep(qstep)?;
        Ok(Self {
            qstep,
            prev: key.points().to_vec(),
            prev_bucket: vec![(0, 0); key.len()],
        })
    }

    fn reconstruct(&mut self, kp: usize, axis: usize, symbol: i64) -> f64 {
        let prev = if axis == 0 { self.prev[kp].0 } else { self.prev[kp].1 };
        let v = (prev + symbol as f64 * self.qstep).clamp(0.0, 1.0);
        if axis == 0 {
            self.prev[kp].0 = v;
            self.prev_bucket[kp].0 = magnitude_bucket(symbol);
        } else {
            self.prev[kp].1 = v;
            self.prev_bucket[kp].1 = magnitude_bucket(symbol);
        }
        v
    }

    fn context(&self, kp: usize, axis: usize) -> usize {
        let bucket = if axis == 0 {
            self.prev_bucket[kp].0
        } else {
            self.prev_bucket[kp].1
        };
        axis * 3 + bucket
    }
}

/// Closed-loop encoder over one sequence; call [`Self::encode_frame`] once
/// per inter frame in order.
pub struct ParamCoder {
    models: ParamModels,
    state: LoopState,
}

impl ParamCoder {
    pub fn new(key_dequantized: &KeypointSet, qstep: f64) -> Result<Self> {
        Ok(Self {
            models: ParamModels::new(),
            state: LoopState::new(key_dequantized, qstep)?,
        })
    }

    /// Encode one frame's keypoints; returns the decoder-identical
    /// reconstruction.
    pub fn encode_frame(&mut self, enc: &mut RangeEncoder, actual: &KeypointSet) -> Result<KeypointSet> {
        if actual.len() != self.state.prev.len() {
            return Err(Error::KeypointCountMismatch {
                a: actual.len(),
                b: self.state.prev.len(),
            });
        }
        let mut recon = Vec::with_capacity(actual.len());
        for (kp, &(ax, ay)) in actual.points().iter().enumerate() {
            let mut coords = (0.0, 0.0);
            for (axis, actual_v) in [(0usize, ax), (1usize, ay)] {
                let prev = if axis == 0 {
                    self.state.prev[kp].0
                } else {
                    self.state.prev[kp].1
                };
                let symbol = ((actual_v - prev) / self.state.qstep).round() as i64;
                let ctx = self.state.context(kp, axis);
                self.encode_symbol(enc, ctx, symbol)?;
                let v = self.state.reconstruct(kp, axis, symbol);
                if axis == 0 {
                    coords.0 = v;
                } else {
                    coords.1 = v;
                }
            }
            recon.push(coords);
        }
        KeypointSet::new(recon)
    }

    fn encode_symbol(&mut self, enc: &mut RangeEncoder, ctx: usize, symbol: i64) -> Result<()> {
        if symbol == 0 {
            return self.models.tokens.encode(enc, ctx, 0);
        }
        let mag = symbol.unsigned_abs();
        let class = (64 - mag.leading_zeros()) as usize;
        if class > MAX_CLASS {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet: 1 << MAX_CLASS,
            });
        }
        let token = 1 + 2 * (class - 1) + usize::from(symbol < 0);
        self.models.tokens.encode(enc, ctx, token)?;
        for bit in (0..class - 1).rev() {
            self.models.bits.encode(enc, 0, ((mag >> bit) & 1) as usize)?;
        }
        Ok(())
    }
}

/// Decoder mirror of [`ParamCoder`].
pub struct ParamDecoder {
    models: ParamModels,
    state: LoopState,
}

impl ParamDecoder {
    pub fn new(key_dequantized: &KeypointSet, qstep: f64) -> Result<Self> {
        Ok(Self {
            models: ParamModels::new(),
            state: LoopState::new(key_dequantized, qstep)?,
        })
    }

    pub fn decode_frame(&mut self, dec: &mut RangeDecoder) -> Result<KeypointSet> {
        let n = self.state.prev.len();
        let mut recon = Vec::with_capacity(n);
        for kp in 0..n {
            let mut coords = (0.0, 0.0);
            for axis in 0..2 {
                let ctx = self.state.context(kp, axis);
                let symbol = self.decode_symbol(dec, ctx)?;
                let v = self.state.reconstruct(kp, axis, symbol);
                if axis == 0 {
                    coords.0 = v;
                } else {
                    coords.1 = v;
                }
            }
            recon.push(coords);
        }
        KeypointSet::new(recon)
    }

    fn decode_symbol(&mut self, dec: &mut RangeDecoder, ctx: usize) -> Result<i64> {
        let token = self.models.tokens.decode(dec, ctx)?;
        if token == 0 {
            return Ok(0);
        }
        let class = (token - 1) / 2 + 1;
        let negative = (token - 1) % 2 == 1;
        let mut mag: u64 = 1;
        for _ in 0..class - 1 {
            mag = (mag << 1) | self.models.bits.decode(dec, 0)? as u64;
        }
        Ok(if negative { -(mag as i64) } else { mag as i64 })
    }
}

/// Whole-track, single-payload parameter encoding. Returns the payload and
/// the closed-loop reconstructed track (frame 0 holds the dequantized
/// key-frame keypoints).
pub fn encode_params(track: &KeypointTrack, qstep: f64) -> Result<(Vec<u8>, KeypointTrack)> {
    if track.frame_count() < 2 {
        return Err(Error::EmptyTrack);
    }
    let key_q = quantize_keypoints(track.set(0), qstep)?;
    let key = dequantize_keypoints(&key_q, qstep)?;
    let mut coder = ParamCoder::new(&key, qstep)?;
    let mut enc = RangeEncoder::new();
    let mut recon = vec![key];
    for l in 1..track.frame_count() {
        recon.push(coder.encode_frame(&mut enc, track.set(l))?);
    }
    Ok((enc.finish(), KeypointTrack::new(recon)?))
}

/// Decode a single-payload parameter stream.
pub fn decode_params(
    bytes: &[u8],
    key_quantized: &[(u16, u16)],
    qstep: f64,
    frame_count: usize,
) -> Result<KeypointTrack> {
    if frame_count < 2 {
        return Err(Error::EmptyTrack);
    }
    let key = dequantize_keypoints(key_quantized, qstep)?;
    let mut decoder = ParamDecoder::new(&key, qstep)?;
    let mut dec = RangeDecoder::new(bytes)?;
    let mut recon = vec![key];
    for _ in 1..frame_count {
        recon.push(decoder.decode_frame(&mut dec)?);
    }
    KeypointTrack::new(recon)
}

/// Per-frame payload variant used by the layered container: one range-coder
/// flush per frame, adaptive contexts persisting across frames.
pub fn encode_params_frames(track: &KeypointTrack, qstep: f64) -> Result<(Vec<Vec<u8>>, KeypointTrack)> {
    if track.frame_count() < 2 {
        return Err(Error::EmptyTrack);
    }
    let key_q = quantize_keypoints(track.set(0), qstep)?;
    let key = dequantize_keypoints(&key_q, qstep)?;
    let mut coder = ParamCoder::new(&key, qstep)?;
    let mut payloads = Vec::with_capacity(track.frame_count() - 1);
    let mut recon = vec![key];
    for l in 1..track.frame_count() {
        let mut enc = RangeEncoder::new();
        recon.push(coder.encode_frame(&mut enc, track.set(l))?);
        payloads.push(enc.finish());
    }
    Ok((payloads, KeypointTrack::new(recon)?))
}

pub fn decode_params_frames(
    payloads: &[Vec<u8>],
    key_quantized: &[(u16, u16)],
    qstep: f64,
) -> Result<KeypointTrack> {
    let key = dequantize_keypoints(key_quantized, qstep)?;
    let mut decoder = ParamDecoder::new(&key, qstep)?;
    let mut recon = vec![key];
    for payload in payloads {
        let mut dec = RangeDecoder::new(payload)?;
        recon.push(decoder.decode_frame(&mut dec)?);
    }
    KeypointTrack::new(recon)
}

/// PGTK keypoint-track sidecar format: magic "PGTK", u32 keypoint count,
/// u32 frame count, then frame-major (x, y) f64-LE pairs.
pub const PGTK_MAGIC: &str = "PGTK";

pub fn write_track_file(track: &KeypointTrack) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(PGTK_MAGIC.as_bytes());
    out.put_u32(track.keypoint_count() as u32);
    out.put_u32(track.frame_count() as u32);
    for set in track.sets() {
        for &(x, y) in set.points() {
            out.put_f64(x);
            out.put_f64(y);
        }
    }
    out
}

pub fn read_track_file(bytes: &[u8]) -> Result<KeypointTrack> {
    let mut r = Reader::new(bytes);
    r.magic(PGTK_MAGIC)?;
    let n = r.u32()? as usize;
    let frames = r.u32()? as usize;
    let mut sets = Vec::with_capacity(frames);
    for _ in 0..frames {
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let x = r.f64()?;
            let y = r.f64()?;
            points.push((x, y));
        }
        sets.push(KeypointSet::new(points)?);
    }
    r.expect_end()?;
    KeypointTrack::new(sets)
}
