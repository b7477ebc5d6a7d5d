//! Intra codec for the key-reference frame: per-plane 8x8 block DCT,
//! uniform quantization, zigzag (run, level) symbols through the adaptive
//! range coder. The encoder returns the decoder-identical reconstruction.

use super::IntraQp;
use crate::entropy::{AdaptiveModel, RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};
use crate::media::Frame;

const BLOCK: usize = 8;

/// Orthonormal DCT-II basis, row u sampled at x.
#[rustfmt::skip]
const DCT_BASIS: [[f64; 8]; 8] = [
    [0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738],
    [0.4903926402016152, 0.4157348061512726, 0.27778511650980114, 0.09754516100806417, -0.0975451610080641, -0.277785116509801, -0.4157348061512727, -0.4903926402016152],
    [0.46193976625564337, 0.19134171618254492, -0.19134171618254486, -0.46193976625564337, -0.4619397662556434, -0.19134171618254517, 0.191341716182545, 0.46193976625564326],
    [0.4157348061512726, -0.0975451610080641, -0.4903926402016152, -0.2777851165098011, 0.2777851165098009, 0.4903926402016152, 0.09754516100806439, -0.41573480615127256],
    [0.3535533905932738, -0.35355339059327373, -0.35355339059327384, 0.3535533905932737, 0.35355339059327384, -0.35355339059327334, -0.35355339059327356, 0.3535533905932733],
    [0.27778511650980114, -0.4903926402016152, 0.09754516100806415, 0.41573480615127273, -0.41573480615127256, -0.09754516100806401, 0.4903926402016153, -0.27778511650980076],
    [0.19134171618254492, -0.4619397662556434, 0.46193976625564326, -0.19134171618254495, -0.19134171618254528, 0.46193976625564337, -0.4619397662556432, 0.19134171618254478],
    [0.09754516100806417, -0.2777851165098011, 0.41573480615127273, -0.4903926402016153, 0.4903926402016152, -0.4157348061512725, 0.27778511650980076, -0.09754516100806429],
];

#[rustfmt::skip]
const ZIGZAG: [usize; 64] = [
     0,  8,  1,  2,  9, 16, 24, 17, 10,  3,  4, 11, 18, 25, 32, 40,
    33, 26, 19, 12,  5,  6, 13, 20, 27, 34, 41, 48, 56, 49, 42, 35,
    28, 21, 14,  7, 15, 22, 29, 36, 43, 50, 57, 58, 51, 44, 37, 30,
    23, 31, 38, 45, 52, 59, 60, 53, 46, 39, 47, 54, 61, 62, 55, 63,
];

/// 2^(r/6) for r in 0..6, so the QP->step law uses exact powers of two
/// whenever (qp - 4) is a multiple of 6.
const SIXTH_ROOTS: [f64; 6] = [
    1.0,
    1.122_462_048_309_373,
    1.259_921_049_894_873_2,
    1.414_213_562_373_095_1,
    1.587_401_051_968_199_4,
    1.781_797_436_280_678_5,
];

/// Uniform quantizer step: max(1, 2^((qp-4)/6)).
pub fn quantization_step(qp: i32) -> f64 {
    let e = qp - 4;
    let k = e.div_euclid(6);
    let r = e.rem_euclid(6) as usize;
    let step = SIXTH_ROOTS[r] * f64::from_bits(((1023 + k) as u64) << 52);
    step.max(1.0)
}

const RUN_EOB: usize = 64;
const RUN_ALPHABET: usize = 65;
const CLASS_ALPHABET: usize = 16;

struct Models {
    runs: AdaptiveModel,
    classes: AdaptiveModel,
    signs: AdaptiveModel,
}

impl Models {
    fn new() -> Self {
        Self {
            // run context: first symbol of a block vs continuation
            runs: AdaptiveModel::new(2, RUN_ALPHABET),
            // class context: DC position vs AC
            classes: AdaptiveModel::new(2, CLASS_ALPHABET),
            signs: AdaptiveModel::new(1, 2),
        }
    }
}

fn forward_dct(block: &[f64; 64]) -> [f64; 64] {
    let mut tmp = [0.0f64; 64];
    for v in 0..BLOCK {
        for x in 0..BLOCK {
            let mut acc = 0.0;
            for y in 0..BLOCK {
                acc += DCT_BASIS[v][y] * block[y * BLOCK + x];
            }
            tmp[v * BLOCK + x] = acc;
        }
    }
    let mut out = [0.0f64; 64];
    for v in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for x in 0..BLOCK {
                acc += DCT_BASIS[u][x] * tmp[v * BLOCK + x];
            }
            out[v * BLOCK + u] = acc;
        }
    }
    out
}

fn inverse_dct(coefs: &[f64; 64]) -> [f64; 64] {
    let mut tmp = [0.0f64; 64];
    for y in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for v in 0..BLOCK {
                acc += DCT_BASIS[v][y] * coefs[v * BLOCK + u];
            }
            tmp[y * BLOCK + u] = acc;
        }
    }
    let mut out = [0.0f64; 64];
    for y in 0..BLOCK {
        for x in 0..BLOCK {
            let mut acc = 0.0;
            for u in 0..BLOCK {
                acc += DCT_BASIS[u][x] * tmp[y * BLOCK + u];
            }
            out[y * BLOCK + x] = acc;
        }
    }
    out
}

/// Shared by encoder and decoder so reconstructions are bit-identical.
fn reconstruct_block(levels: &[i32; 64], step: f64) -> [u8; 64] {
    let mut coefs = [0.0f64; 64];
    for (zz, &level) in levels.iter().enumerate() {
        coefs[ZIGZAG[zz]] = level as f64 * step;
    }
    let spatial = inverse_dct(&coefs);
    let mut out = [0u8; 64];
    for (i, &v) in spatial.iter().enumerate() {
        out[i] = (v + 128.0).round().clamp(0.0, 255.0) as u8;
    }
    out
}

fn magnitude_class(mag: u32) -> usize {
    (32 - mag.leading_zeros()) as usize // bit length; mag >= 1
}

fn code_block(enc: &mut RangeEncoder, models: &mut Models, levels: &[i32; 64]) -> Result<()> {
    let mut pos = 0usize;
    let mut first = true;
    while pos < 64 {
        let next = (pos..64).find(|&i| levels[i] != 0);
        let run_ctx = usize::from(!first);
        match next {
            None => {
                models.runs.encode(enc, run_ctx, RUN_EOB)?;
                return Ok(());
            }
            Some(idx) => {
                models.runs.encode(enc, run_ctx, idx - pos)?;
                let level = levels[idx];
                let mag = level.unsigned_abs();
                let class = magnitude_class(mag);
                if class > CLASS_ALPHABET {
                    return Err(Error::SymbolOutOfRange {
                        symbol: level as i64,
                        alphabet: 1 << CLASS_ALPHABET,
                    });
                }
                let class_ctx = usize::from(idx != 0);
                models.classes.encode(enc, class_ctx, class - 1)?;
                // extra bits below the class MSB, most significant first
                for bit in (0..class - 1).rev() {
                    let b = (mag >> bit) & 1;
                    models.signs.encode(enc, 0, b as usize)?; // near-uniform
                }
                models.signs.encode(enc, 0, usize::from(level < 0))?;
                pos = idx + 1;
                first = false;
            }
        }
    }
    Ok(())
}

fn decode_block(dec: &mut RangeDecoder, models: &mut Models) -> Result<[i32; 64]> {
    let mut levels = [0i32; 64];
    let mut pos = 0usize;
    let mut first = true;
    while pos < 64 {
        let run_ctx = usize::from(!first);
        let run = models.runs.decode(dec, run_ctx)?;
        if run == RUN_EOB {
            return Ok(levels);
        }
        pos += run;
        if pos > 63 {
            return Err(Error::MalformedStream(format!(
                "run overflows block (pos {pos})"
            )));
        }
        let class_ctx = usize::from(pos != 0);
        let class = models.classes.decode(dec, class_ctx)? + 1;
        let mut mag: u32 = 1;
        for _ in 0..class - 1 {
            mag = (mag << 1) | models.signs.decode(dec, 0)? as u32;
        }
        let negative = models.signs.decode(dec, 0)? == 1;
        levels[pos] = if negative { -(mag as i32) } else { mag as i32 };
        pos += 1;
        first = false;
    }
    Ok(levels)
}

fn for_each_block(width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
    for by in (0..height).step_by(BLOCK) {
        for bx in (0..width).step_by(BLOCK) {
            f(bx, by);
        }
    }
}

/// Encode a key frame; returns the payload and the reconstruction the
/// decoder will produce bit-identically.
pub fn encode_key_frame(frame: &Frame, qp: IntraQp) -> Result<(Vec<u8>, Frame)> {
    let (w, h) = (frame.width(), frame.height());
    if w % BLOCK != 0 || h % BLOCK != 0 {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            reason: "intra codec needs dimensions divisible by 8",
        });
    }
    let step = qp.step();
    let mut enc = RangeEncoder::new();
    let mut models = Models::new();
    let mut recon = vec![0u8; 3 * w * h];
    for c in 0..3 {
        let plane = frame.plane(c);
        let mut err = Ok(());
        for_each_block(w, h, |bx, by| {
            if err.is_err() {
                return;
            }
            let mut block = [0.0f64; 64];
            for y in 0..BLOCK {
                for x in 0..BLOCK {
                    block[y * BLOCK + x] = plane[(by + y) * w + bx + x] as f64 - 128.0;
                }
            }
            let coefs = forward_dct(&block);
            let mut levels = [0i32; 64];
            for (zz, &src) in ZIGZAG.iter().enumerate() {
                levels[zz] = (coefs[src] / step).round() as i32;
            }
            if let e @ Err(_) = code_block(&mut enc, &mut models, &levels) {
                err = e;
                return;
            }
            let pixels = reconstruct_block(&levels, step);
            for y in 0..BLOCK {
                for x in 0..BLOCK {
                    recon[c * w * h + (by + y) * w + bx + x] = pixels[y * BLOCK + x];
                }
            }
        });
        err?;
    }
    let recon = Frame::new(w, h, recon)?;
    recon.check_invariants();
    Ok((enc.finish(), recon))
}

/// Decode a key-frame payload; bit-identical to the encoder's returned
/// reconstruction.
pub fn decode_key_frame(bytes: &[u8], width: usize, height: usize, qp: IntraQp) -> Result<Frame> {
    if width % BLOCK != 0 || height % BLOCK != 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "intra codec needs dimensions divisible by 8",
        });
    }
    let step = qp.step();
    let mut dec = RangeDecoder::new(bytes)?;
    let mut models = Models::new();
    let mut recon = vec![0u8; 3 * width * height];
    for c in 0..3 {
        let mut err = Ok(());
        for_each_block(width, height, |bx, by| {
            if err.is_err() {
                return;
            }
            let levels = match decode_block(&mut dec, &mut models) {
                Ok(l) => l,
                Err(e) => {
                    err = Err(e);
                    return;
                }
            };
            let pixels = reconstruct_block(&levels, step);
            for y in 0..BLOCK {
                for x in 0..BLOCK {
                    recon[c * width * height + (by + y) * width + bx + x] = pixels[y * BLOCK + x];
                }
            }
        });
        err?;
    }
    Frame::new(width, height, recon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{generate_synthetic_sequence, SyntheticSpec};

    fn textured_key_frame() -> Frame {
        let spec = SyntheticSpec {
            width: 128,
            height: 128,
            frame_count: 2,
            keypoint_count: 0,
            ..Default::default()
        };
        let (seq, _) = generate_synthetic_sequence(&spec).unwrap();
        seq.frame(0).clone()
    }

    fn mse(a: &Frame, b: &Frame) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum::<f64>()
            / a.data().len() as f64
    }

    #[test]
    fn step_law() {
        assert_eq!(quantization_step(4), 1.0);
        assert_eq!(quantization_step(22), 8.0);
        assert_eq!(quantization_step(52), 256.0);
        assert!((quantization_step(12) - 2.519_842_099_789_746_4).abs() < 1e-15);
        assert_eq!(quantization_step(2), 1.0); // floor
    }

    #[test]
    fn constant_frames_survive_low_and_mid_qp_exactly() {
        for v in [0u8, 1, 37, 128, 254, 255] {
            let f = Frame::filled(16, 16, [v, v, v]).unwrap();
            for qp in [2, 12, 22] {
                let (_, recon) = encode_key_frame(&f, IntraQp::new(qp).unwrap()).unwrap();
                assert_eq!(recon, f, "v={v} qp={qp}");
            }
            // at the coarsest steps only the DC granularity is preserved
            let (_, recon) = encode_key_frame(&f, IntraQp::new(52).unwrap()).unwrap();
            let worst = recon
                .data()
                .iter()
                .zip(f.data())
                .map(|(&a, &b)| (a as i32 - b as i32).abs())
                .max()
                .unwrap();
            assert!(worst <= 16, "v={v} worst={worst}");
        }
    }

    #[test]
    fn decoder_matches_encoder_reconstruction_bit_exactly() {
        let f = textured_key_frame();
        for qp in IntraQp::ALLOWED {
            let qp = IntraQp::new(qp).unwrap();
            let (bytes, recon) = encode_key_frame(&f, qp).unwrap();
            let decoded = decode_key_frame(&bytes, 128, 128, qp).unwrap();
            assert_eq!(decoded, recon);
        }
    }

    #[test]
    fn rate_and_distortion_are_monotone_in_qp() {
        let f = textured_key_frame();
        let mut last_bytes = usize::MAX;
        let mut last_mse = -1.0f64;
        for qp in IntraQp::ALLOWED {
            let (bytes, recon) = encode_key_frame(&f, IntraQp::new(qp).unwrap()).unwrap();
            let m = mse(&f, &recon);
            assert!(bytes.len() < last_bytes, "qp={qp} not smaller");
            assert!(m >= last_mse, "qp={qp} mse decreased");
            last_bytes = bytes.len();
            last_mse = m;
        }
    }

    #[test]
    fn near_lossless_mode_reaches_50db() {
        let f = textured_key_frame();
        let (_, recon) = encode_key_frame(&f, IntraQp::new(2).unwrap()).unwrap();
        let m = mse(&f, &recon).max(1e-12);
        let psnr = 10.0 * (255.0 * 255.0 / m).log10();
        assert!(psnr >= 50.0, "psnr={psnr:.2}");
    }

    #[test]
    fn truncated_payload_errors_out() {
        let f = textured_key_frame();
        let (bytes, _) = encode_key_frame(&f, IntraQp::new(22).unwrap()).unwrap();
        let result = decode_key_frame(&bytes[..bytes.len() / 3], 128, 128, IntraQp::new(22).unwrap());
        assert!(result.is_err());
    }

    #[test]
    fn dct_round_trips_through_inverse() {
        let mut block = [0.0f64; 64];
        for (i, v) in block.iter_mut().enumerate() {
            *v = ((i * 37) % 251) as f64 - 125.0;
        }
        let back = inverse_dct(&forward_dct(&block));
        for (a, b) in block.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
