//! Layered `.pgen` bitstream: sequence header, key-frame payload, then one
//! record per inter frame holding the base payload and up to three tagged
//! enhancement payloads. All integers are little-endian; every payload is
//! length-prefixed so enhancement layers can be dropped without touching
//! the remaining bytes.
//!
//! Layout:
//! ```text
//! magic "PGEN"  u16 version
//! u32 width  u32 height  u32 frame_count  u32 fps
//! u16 keypoint_count  u8 key_qp  u8 granularity_mask
//! f64 qstep  f64 tau  f64 q_gain[3]
//! u16 block_size  u16 search_range
//! keypoint_count x (u16 x, u16 y)        quantized key keypoints
//! u32 len + bytes                        key-frame payload
//! per inter frame:
//!   u32 len + bytes                      base payload
//!   u8 n_enh, then per enhancement (ascending level id):
//!     u8 level_id  u16 checksum  u32 len + bytes
//! ```

use crate::base_layer::IntraQp;
use crate::enhancement::GranularityLevel;
use crate::error::{Error, Result};
use crate::wire::{Reader, WriteLe};

pub const PGEN_MAGIC: &str = "PGEN";
pub const PGEN_VERSION: u16 = 1;

/// Which layers to keep/decode; the base layer is always included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSet {
    mask: u8,
}

impl LayerSet {
    pub fn base_only() -> Self {
        Self { mask: 0 }
    }

    pub fn all() -> Self {
        Self { mask: 0b111 }
    }

    pub fn from_mask(mask: u8) -> Result<Self> {
        if mask & !0b111 != 0 {
            return Err(Error::MalformedStream(format!(
                "granularity mask {mask:#04x} has unknown bits"
            )));
        }
        Ok(Self { mask })
    }

    pub fn from_levels(levels: &[GranularityLevel]) -> Self {
        let mut mask = 0;
        for l in levels {
            mask |= 1 << l.id();
        }
        Self { mask }
    }

    pub fn with_level(mut self, level: GranularityLevel) -> Self {
        self.mask |= 1 << level.id();
        self
    }

    pub fn mask(&self) -> u8 {
        self.mask
    }

    pub fn contains(&self, level: GranularityLevel) -> bool {
        self.mask & (1 << level.id()) != 0
    }

    pub fn is_subset_of(&self, other: &LayerSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn levels(&self) -> Vec<GranularityLevel> {
        GranularityLevel::all()
            .into_iter()
            .filter(|l| self.contains(*l))
            .collect()
    }

    /// Highest-granularity level in the set, if any.
    pub fn finest(&self) -> Option<GranularityLevel> {
        self.levels().into_iter().max()
    }

    pub fn is_base_only(&self) -> bool {
        self.mask == 0
    }
}

impl std::fmt::Display for LayerSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "base")?;
        for level in self.levels() {
            write!(f, "+{}", level.side())?;
        }
        Ok(())
    }
}

/// Everything a decoder needs to reconstruct the encoder's configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceHeader {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub fps: u32,
    pub key_qp: IntraQp,
    pub qstep: f64,
    pub tau: f64,
    pub granularity: LayerSet,
    pub q_gains: [f64; 3],
    pub block_size: usize,
    pub search_range: usize,
    pub key_points_q: Vec<(u16, u16)>,
}

impl SequenceHeader {
    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidDimensions {
                width: self.width,
                height: self.height,
                reason: "zero-area frame",
            });
        }
        if self.frame_count < 2 {
            return Err(Error::InvalidConfig("frame_count must be >= 2".into()));
        }
        if !(self.qstep > 0.0 && self.qstep.is_finite()) || !(self.tau > 0.0) {
            return Err(Error::InvalidConfig("qstep and tau must be positive".into()));
        }
        if self.block_size == 0 || self.q_gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidConfig("invalid block size or feature gain".into()));
        }
        Ok(())
    }

    pub fn q_gain(&self, level: GranularityLevel) -> f64 {
        self.q_gains[level.id() as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementPayload {
    pub level: GranularityLevel,
    pub checksum: u16,
    pub bytes: Vec<u8>,
}

/// One inter frame's payloads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameRecord {
    pub base: Vec<u8>,
    pub enhancements: Vec<EnhancementPayload>,
}

impl FrameRecord {
    pub fn enhancement(&self, level: GranularityLevel) -> Option<&EnhancementPayload> {
        self.enhancements.iter().find(|e| e.level == level)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub header: SequenceHeader,
    pub key_payload: Vec<u8>,
    pub records: Vec<FrameRecord>,
}

pub fn write_stream(stream: &Stream) -> Result<Vec<u8>> {
    let h = &stream.header;
    h.validate()?;
    if stream.records.len() != h.frame_count - 1 {
        return Err(Error::DimensionMismatch {
            expected: format!("{} frame records", h.frame_count - 1),
            got: format!("{}", stream.records.len()),
        });
    }
    let mut out = Vec::new();
    out.extend_from_slice(PGEN_MAGIC.as_bytes());
    out.put_u16(PGEN_VERSION);
    out.put_u32(h.width as u32);
    out.put_u32(h.height as u32);
    out.put_u32(h.frame_count as u32);
    out.put_u32(h.fps);
    out.put_u16(h.key_points_q.len() as u16);
    out.put_u8(h.key_qp.value() as u8);
    out.put_u8(h.granularity.mask());
    out.put_f64(h.qstep);
    out.put_f64(h.tau);
    for g in h.q_gains {
        out.put_f64(g);
    }
    out.put_u16(h.block_size as u16);
    out.put_u16(h.search_range as u16);
    for &(x, y) in &h.key_points_q {
        out.put_u16(x);
        out.put_u16(y);
    }
    out.put_u32(stream.key_payload.len() as u32);
    out.extend_from_slice(&stream.key_payload);
    for record in &stream.records {
        let mut last_level = None;
        for e in &record.enhancements {
            if !h.granularity.contains(e.level) {
                return Err(Error::LayerAbsent {
                    layer: format!("{}", e.level.side()),
                });
            }
            if let Some(prev) = last_level {
                if e.level <= prev {
                    return Err(Error::MalformedStream(
                        "enhancement payloads out of order".into(),
                    ));
                }
            }
            last_level = Some(e.level);
        }
        out.put_u32(record.base.len() as u32);
        out.extend_from_slice(&record.base);
        out.put_u8(record.enhancements.len() as u8);
        for e in &record.enhancements {
            out.put_u8(e.level.id());
            out.put_u16(e.checksum);
            out.put_u32(e.bytes.len() as u32);
            out.extend_from_slice(&e.bytes);
        }
    }
    Ok(out)
}

pub fn read_stream(bytes: &[u8]) -> Result<Stream> {
    let mut r = Reader::new(bytes);
    r.magic(PGEN_MAGIC)?;
    let version = r.u16()?;
    if version != PGEN_VERSION {
        return Err(Error::VersionMismatch {
            got: version,
            expected: PGEN_VERSION,
        });
    }
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let frame_count = r.u32()? as usize;
    let fps = r.u32()?;
    let keypoint_count = r.u16()? as usize;
    let key_qp = IntraQp::new(r.u8()? as i32)?;
    let granularity = LayerSet::from_mask(r.u8()?)?;
    let qstep = r.f64()?;
    let tau = r.f64()?;
    let q_gains = [r.f64()?, r.f64()?, r.f64()?];
    let block_size = r.u16()? as usize;
    let search_range = r.u16()? as usize;
    let mut key_points_q = Vec::with_capacity(keypoint_count);
    for _ in 0..keypoint_count {
        let x = r.u16()?;
        let y = r.u16()?;
        key_points_q.push((x, y));
    }
    let key_len = r.u32()? as usize;
    let key_payload = r.take(key_len)?.to_vec();
    let header = SequenceHeader {
        width,
        height,
        frame_count,
        fps,
        key_qp,
        qstep,
        tau,
        granularity,
        q_gains,
        block_size,
        search_range,
        key_points_q,
    };
    header.validate()?;
    let mut records = Vec::with_capacity(frame_count - 1);
    for f in 0..frame_count - 1 {
        let base_len = r.u32()? as usize;
        let base = r.take(base_len)?.to_vec();
        let n_enh = r.u8()? as usize;
        if n_enh > 3 {
            return Err(Error::MalformedStream(format!(
                "frame {f} declares {n_enh} enhancement payloads"
            )));
        }
        let mut enhancements = Vec::with_capacity(n_enh);
        let mut last: Option<GranularityLevel> = None;
        for _ in 0..n_enh {
            let level = GranularityLevel::from_id(r.u8()?)?;
            if !header.granularity.contains(level) {
                return Err(Error::MalformedStream(format!(
                    "frame {f} carries level {} absent from the header mask",
                    level.side()
                )));
            }
            if let Some(prev) = last {
                if level <= prev {
                    return Err(Error::MalformedStream(format!(
                        "frame {f} enhancement payloads out of order"
                    )));
                }
            }
            last = Some(level);
            let checksum = r.u16()?;
            let len = r.u32()? as usize;
            let payload = r.take(len)?.to_vec();
            enhancements.push(EnhancementPayload {
                level,
                checksum,
                bytes: payload,
            });
        }
        records.push(FrameRecord { base, enhancements });
    }
    r.expect_end()?;
    Ok(Stream {
        header,
        key_payload,
        records,
    })
}

/// Drop every enhancement payload outside `keep` and update the header
/// mask. The result is a valid stream whose decode matches decoding the
/// original restricted to `keep`.
pub fn extract_substream(bytes: &[u8], keep: LayerSet) -> Result<Vec<u8>> {
    let mut stream = read_stream(bytes)?;
    if !keep.is_subset_of(&stream.header.granularity) {
        let missing = keep.mask() & !stream.header.granularity.mask();
        return Err(Error::LayerAbsent {
            layer: format!("mask {missing:#05b}"),
        });
    }
    stream.header.granularity = keep;
    for record in &mut stream.records {
        record.enhancements.retain(|e| keep.contains(e.level));
    }
    write_stream(&stream)
}

/// Cumulative per-layer rates from a completed encode.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// Base layer alone (key frame plus parameters), kbps.
    pub base_kbps: f64,
    /// (level, cumulative kbps including base and all previous levels),
    /// ascending by level.
    pub cumulative: Vec<(GranularityLevel, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSelection {
    pub layers: LayerSet,
    /// False when even the base layer exceeds the budget; the base layer is
    /// still returned and the caller decides.
    pub fits_budget: bool,
}

/// Greedy prefix selection: base plus the largest granularity prefix whose
/// cumulative rate stays within the budget.
pub fn select_layers(rates: &RateTable, budget_kbps: f64) -> LayerSelection {
    let mut layers = LayerSet::base_only();
    let fits_budget = rates.base_kbps <= budget_kbps;
    if fits_budget {
        for &(level, cumulative) in &rates.cumulative {
            if cumulative <= budget_kbps {
                layers = layers.with_level(level);
            } else {
                break;
            }
        }
    }
    LayerSelection { layers, fits_budget }
}
