//! PGRV raw video file format.
//!
//! Layout (all integers little-endian):
//! magic `"PGRV"` (4 bytes), u32 width, u32 height, u32 frame_count,
//! u32 fps, then `frame_count` frames of planar 8-bit R, G, B planes.

use super::frame::{Frame, VideoSequence};
use crate::error::{Error, Result};
use crate::wire::{Reader, WriteLe};

pub const PGRV_MAGIC: &str = "PGRV";
/// Fixed header size in bytes: magic plus four u32 fields.
pub const PGRV_HEADER_LEN: usize = 4 + 4 * 4;

pub fn write_raw_video(seq: &VideoSequence) -> Vec<u8> {
    let plane = seq.width() * seq.height();
    let mut out = Vec::with_capacity(PGRV_HEADER_LEN + seq.len() * 3 * plane);
    out.extend_from_slice(PGRV_MAGIC.as_bytes());
    out.put_u32(seq.width() as u32);
    out.put_u32(seq.height() as u32);
    out.put_u32(seq.len() as u32);
    out.put_u32(seq.fps());
    for frame in seq.frames() {
        out.extend_from_slice(frame.data());
    }
    out
}

pub fn read_raw_video(bytes: &[u8]) -> Result<VideoSequence> {
    let mut r = Reader::new(bytes);
    r.magic(PGRV_MAGIC)?;
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let frame_count = r.u32()? as usize;
    let fps = r.u32()?;
    let frame_bytes = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(3))
        .ok_or(Error::InvalidDimensions {
            width,
            height,
            reason: "dimension overflow",
        })?;
    if frame_count < 2 {
        return Err(Error::InvalidConfig(format!(
            "PGRV declares {frame_count} frames; at least 2 required"
        )));
    }
    let mut frames = Vec::with_capacity(frame_count);
    for _ in 0..frame_count {
        let data = r.take(frame_bytes)?;
        frames.push(Frame::new(width, height, data.to_vec())?);
    }
    r.expect_end()?;
    VideoSequence::new(frames, fps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SplitMix64;

    fn noisy_sequence(w: usize, h: usize, n: usize) -> VideoSequence {
        let mut rng = SplitMix64::new(99);
        let frames = (0..n)
            .map(|_| {
                let data = (0..3 * w * h).map(|_| rng.next_below(256) as u8).collect();
                Frame::new(w, h, data).unwrap()
            })
            .collect();
        VideoSequence::new(frames, 25).unwrap()
    }

    #[test]
    fn round_trip_preserves_sequences() {
        let seq = noisy_sequence(16, 12, 4);
        let bytes = write_raw_video(&seq);
        let back = read_raw_video(&bytes).unwrap();
        assert_eq!(seq, back);
        // write∘read is the identity on bytes as well
        assert_eq!(bytes, write_raw_video(&back));
    }

    #[test]
    fn payload_size_is_header_plus_planes() {
        let seq = noisy_sequence(256, 256, 3);
        let bytes = write_raw_video(&seq);
        assert_eq!(bytes.len(), PGRV_HEADER_LEN + 3 * 3 * 65536);
    }

    #[test]
    fn truncated_payload_is_detected() {
        let seq = noisy_sequence(8, 8, 2);
        let mut bytes = write_raw_video(&seq);
        // drop one frame worth of data while the header still declares 2
        bytes.truncate(bytes.len() - 3 * 64);
        assert!(matches!(
            read_raw_video(&bytes),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn bad_magic_is_rejected() {
        let seq = noisy_sequence(8, 8, 2);
        let mut bytes = write_raw_video(&seq);
        bytes[0] = b'X';
        assert!(matches!(
            read_raw_video(&bytes),
            Err(Error::BadMagic { .. })
        ));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let seq = noisy_sequence(8, 8, 2);
        let mut bytes = write_raw_video(&seq);
        bytes.push(0);
        assert!(matches!(
            read_raw_video(&bytes),
            Err(Error::TrailingBytes { .. })
        ));
    }
}
