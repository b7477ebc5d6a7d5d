//! Whole-sequence encode/decode pipeline over the layered container.

use crate::base_layer::{
    decode_key_frame, decode_params_frames, dequantize_keypoints, encode_key_frame,
    encode_params_frames, quantize_keypoints, synthesize_base, IntraQp, KeypointTrack,
    DEFAULT_QSTEP,
};
use crate::container::{
    read_stream, write_stream, EnhancementPayload, FrameRecord, LayerSet, RateTable,
    SequenceHeader, Stream,
};
use crate::enhancement::{
    compose_fine, decode_feature, encode_feature, extract_feature, feature_checksum, recalibrate,
    refine_motion, GranularityLevel,
};
use crate::error::{Error, Result};
use crate::eval::bitrate_kbps;
use crate::media::VideoSequence;

/// Encoder/decoder configuration; everything lands in the sequence header
/// so the decoder rebuilds it from the stream alone.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub key_qp: IntraQp,
    pub qstep: f64,
    pub tau: f64,
    pub granularity: LayerSet,
    pub q_gains: [f64; 3],
    pub block_size: usize,
    pub search_range: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            key_qp: IntraQp::new(22).expect("22 is in the ladder"),
            qstep: DEFAULT_QSTEP,
            tau: 24.0,
            granularity: LayerSet::all(),
            q_gains: [1.0, 1.0, 1.0],
            block_size: 16,
            search_range: 12,
        }
    }
}

/// Byte accounting of one encode, per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    pub frame_count: usize,
    pub fps: u32,
    pub granularity: LayerSet,
    pub key_bytes: usize,
    pub param_bytes: usize,
    pub enh_bytes: [usize; 3],
    pub container_bytes: usize,
}

/// Per-enhancement-payload container bookkeeping: level id + checksum + length.
const ENH_TAG_BYTES: usize = 1 + 2 + 4;

impl RateSummary {
    /// kbps of the base layer alone (key frame + parameters).
    pub fn base_kbps(&self) -> f64 {
        let bytes = self.layer_set_bytes(LayerSet::base_only());
        bitrate_kbps(8 * bytes as u64, self.frame_count, self.fps)
    }

    /// kbps of the parameter payloads alone.
    pub fn param_kbps(&self) -> f64 {
        bitrate_kbps(8 * self.param_bytes as u64, self.frame_count, self.fps)
    }

    /// Exact stream size after extracting `layers` (container framing
    /// included).
    pub fn layer_set_bytes(&self, layers: LayerSet) -> usize {
        let mut bytes = self.container_bytes;
        for level in self.granularity.levels() {
            if !layers.contains(level) {
                bytes -= self.enh_bytes[level.id() as usize]
                    + (self.frame_count - 1) * ENH_TAG_BYTES;
            }
        }
        bytes
    }

    pub fn layer_set_kbps(&self, layers: LayerSet) -> f64 {
        bitrate_kbps(
            8 * self.layer_set_bytes(layers) as u64,
            self.frame_count,
            self.fps,
        )
    }

    /// Cumulative rate table for bandwidth-driven layer selection.
    pub fn rate_table(&self) -> RateTable {
        let mut cumulative = Vec::new();
        let mut set = LayerSet::base_only();
        for level in self.granularity.levels() {
            set = set.with_level(level);
            cumulative.push((level, self.layer_set_kbps(set)));
        }
        RateTable {
            base_kbps: self.layer_set_kbps(LayerSet::base_only()),
            cumulative,
        }
    }
}

fn validate_inputs(seq: &VideoSequence, track: &KeypointTrack, config: &CodecConfig) -> Result<()> {
    if track.frame_count() != seq.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} track frames", seq.len()),
            got: format!("{}", track.frame_count()),
        });
    }
    if seq.width() % 8 != 0 || seq.height() % 8 != 0 {
        return Err(Error::InvalidDimensions {
            width: seq.width(),
            height: seq.height(),
            reason: "intra codec needs dimensions divisible by 8",
        });
    }
    if !config.granularity.is_base_only() {
        if seq.width() % config.block_size != 0 || seq.height() % config.block_size != 0 {
            return Err(Error::InvalidDimensions {
                width: seq.width(),
                height: seq.height(),
                reason: "dimensions must be multiples of the matching block size",
            });
        }
        if let Some(finest) = config.granularity.finest() {
            if finest.side() > seq.width().min(seq.height()) {
                return Err(Error::InvalidConfig(format!(
                    "granularity {} exceeds frame size",
                    finest.side()
                )));
            }
        }
    }
    Ok(())
}

/// Encode a sequence with its oracle keypoint track into a layered stream.
pub fn encode_sequence(
    seq: &VideoSequence,
    track: &KeypointTrack,
    config: &CodecConfig,
) -> Result<(Vec<u8>, RateSummary)> {
    validate_inputs(seq, track, config)?;
    let key_points_q = quantize_keypoints(track.set(0), config.qstep)?;
    let (key_payload, key_recon) = encode_key_frame(seq.frame(0), config.key_qp)?;
    let (param_payloads, recon_track) = encode_params_frames(track, config.qstep)?;

    let levels = config.granularity.levels();
    let mut records = Vec::with_capacity(seq.len() - 1);
    let mut enh_bytes = [0usize; 3];
    let mut param_bytes = 0usize;
    for l in 1..seq.len() {
        let base_payload = param_payloads[l - 1].clone();
        param_bytes += base_payload.len();
        let mut enhancements = Vec::with_capacity(levels.len());
        if !levels.is_empty() {
            let base_frame = synthesize_base(
                &key_recon,
                recon_track.set(0),
                recon_track.set(l),
                config.tau,
            )?;
            for &level in &levels {
                let side = level.side();
                let base_feature = extract_feature(&base_frame, side)?;
                let feature = extract_feature(seq.frame(l), side)?;
                let bytes = encode_feature(&feature, &base_feature, config.q_gain(level))?;
                enh_bytes[level.id() as usize] += bytes.len();
                enhancements.push(EnhancementPayload {
                    level,
                    checksum: feature_checksum(&base_feature),
                    bytes,
                });
            }
        }
        records.push(FrameRecord {
            base: base_payload,
            enhancements,
        });
    }

    let header = SequenceHeader {
        width: seq.width(),
        height: seq.height(),
        frame_count: seq.len(),
        fps: seq.fps(),
        key_qp: config.key_qp,
        qstep: config.qstep,
        tau: config.tau,
        granularity: config.granularity,
        q_gains: config.q_gains,
        block_size: config.block_size,
        search_range: config.search_range,
        key_points_q,
    };
    let stream = Stream {
        header,
        key_payload: key_payload.clone(),
        records,
    };
    let bytes = write_stream(&stream)?;
    let summary = RateSummary {
        frame_count: seq.len(),
        fps: seq.fps(),
        granularity: config.granularity,
        key_bytes: key_payload.len(),
        param_bytes,
        enh_bytes,
        container_bytes: bytes.len(),
    };
    Ok((bytes, summary))
}

impl CodecConfig {
    pub fn q_gain(&self, level: GranularityLevel) -> f64 {
        self.q_gains[level.id() as usize]
    }
}

/// Whether the decoder runs the full coarse-to-fine path or stops at the
/// recalibrated coarse frame (ablation hook).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnhancementMode {
    #[default]
    Full,
    CoarseOnly,
}

#[derive(Debug, Clone)]
pub struct Decoded {
    pub sequence: VideoSequence,
    pub header: SequenceHeader,
}

/// Decode a stream restricted to `layers` (which must all be present).
pub fn decode_stream(bytes: &[u8], layers: LayerSet, mode: EnhancementMode) -> Result<Decoded> {
    let stream = read_stream(bytes)?;
    let header = stream.header.clone();
    if !layers.is_subset_of(&header.granularity) {
        let missing = layers.mask() & !header.granularity.mask();
        return Err(Error::LayerAbsent {
            layer: format!("mask {missing:#05b}"),
        });
    }
    let key_recon = decode_key_frame(&stream.key_payload, header.width, header.height, header.key_qp)?;
    let track = decode_params_frames(
        &stream
            .records
            .iter()
            .map(|r| r.base.clone())
            .collect::<Vec<_>>(),
        &header.key_points_q,
        header.qstep,
    )?;
    let key_set = dequantize_keypoints(&header.key_points_q, header.qstep)?;

    let mut frames = Vec::with_capacity(header.frame_count);
    frames.push(key_recon.clone());
    for (l, record) in stream.records.iter().enumerate() {
        let frame_index = l + 1;
        let base_frame = synthesize_base(&key_recon, &key_set, track.set(frame_index), header.tau)?;
        let chosen = layers
            .levels()
            .into_iter()
            .rev()
            .find(|level| record.enhancement(*level).is_some());
        let out = match chosen {
            None => base_frame,
            Some(level) => {
                let payload = record.enhancement(level).expect("present by construction");
                let base_feature = extract_feature(&base_frame, level.side())?;
                if feature_checksum(&base_feature) != payload.checksum {
                    return Err(Error::ChecksumMismatch {
                        frame: frame_index,
                        level: level.id() as usize,
                    });
                }
                let feature = decode_feature(&payload.bytes, &base_feature, header.q_gain(level))?;
                let coarse = recalibrate(&base_frame, &feature)?;
                match mode {
                    EnhancementMode::CoarseOnly => coarse,
                    EnhancementMode::Full => {
                        let (field, occ) = refine_motion(
                            &key_recon,
                            &coarse,
                            header.block_size,
                            header.search_range,
                        )?;
                        compose_fine(&key_recon, &coarse, &field, &occ)?
                    }
                }
            }
        };
        frames.push(out);
    }
    Ok(Decoded {
        sequence: VideoSequence::new(frames, header.fps)?,
        header,
    })
}

/// Decode with every layer the stream carries.
pub fn decode_all(bytes: &[u8]) -> Result<Decoded> {
    let present = read_stream(bytes)?.header.granularity;
    decode_stream(bytes, present, EnhancementMode::Full)
}
