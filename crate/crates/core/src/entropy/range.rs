//! Byte-oriented range coder.
//!
//! 32-bit range with a 64-bit low accumulator; carries are resolved through
//! a cached byte plus a pending run of 0xFF bytes, so emitted output never
//! needs back-patching. The decoder replays the encoder state symbol for
//! symbol. After every renormalization the range stays in [2^24, 2^32).

use crate::error::{Error, Result};

const RANGE_TOP: u32 = 1 << 24;
/// Coding models must keep cumulative totals at or below this.
pub const MAX_TOTAL: u32 = 1 << 16;

pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out: Vec::new(),
        }
    }

    /// Encode one symbol occupying [cum, cum+freq) out of `total`.
    pub fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total && total <= MAX_TOTAL);
        let r = self.range / total;
        self.low += r as u64 * cum as u64;
        // the top symbol absorbs the division remainder
        self.range = if cum + freq == total {
            self.range - r * cum
        } else {
            r * freq
        };
        while self.range < RANGE_TOP {
            self.shift_low();
            self.range <<= 8;
        }
    }

    /// Raw 16-bit literal as a single uniform symbol.
    pub fn encode_literal_u16(&mut self, v: u16) {
        self.encode(v as u32, 1, MAX_TOTAL);
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            if self.cache_size > 0 {
                self.out.push(self.cache.wrapping_add(carry));
                for _ in 1..self.cache_size {
                    self.out.push(0xFFu8.wrapping_add(carry));
                }
            }
            self.cache = (self.low >> 24) as u8;
            self.cache_size = 0;
        }
        self.cache_size += 1;
        self.low = (self.low << 8) & 0xFFFF_FFFF;
    }

    /// Flush the accumulator and return the coded bytes.
    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

pub struct RangeDecoder<'a> {
    code: u32,
    range: u32,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(buf: &'a [u8]) -> Result<Self> {
        // the first byte is the encoder's initial zero cache
        if buf.is_empty() {
            return Err(Error::StreamExhausted);
        }
        let mut d = Self {
            code: 0,
            range: u32::MAX,
            buf,
            pos: 1,
        };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte()? as u32;
        }
        Ok(d)
    }

    fn next_byte(&mut self) -> Result<u8> {
        if self.pos >= self.buf.len() {
            return Err(Error::StreamExhausted);
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        Ok(b)
    }

    /// Scaled code value in [0, total); the caller locates the symbol whose
    /// cumulative interval contains it, then calls [`Self::advance`].
    pub fn decode_target(&mut self, total: u32) -> u32 {
        debug_assert!(total <= MAX_TOTAL);
        let r = self.range / total;
        ((self.code / r) as u32).min(total - 1)
    }

    /// Consume the located symbol's interval.
    pub fn advance(&mut self, cum: u32, freq: u32, total: u32) -> Result<()> {
        let r = self.range / total;
        self.code -= r * cum;
        self.range = if cum + freq == total {
            self.range - r * cum
        } else {
            r * freq
        };
        while self.range < RANGE_TOP {
            self.code = (self.code << 8) | self.next_byte()? as u32;
            self.range <<= 8;
        }
        Ok(())
    }

    pub fn decode_literal_u16(&mut self) -> Result<u16> {
        let v = self.decode_target(MAX_TOTAL) as u16;
        self.advance(v as u32, 1, MAX_TOTAL)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SplitMix64;

    #[test]
    fn empty_stream_flush_overhead_is_small() {
        let enc = RangeEncoder::new();
        let bytes = enc.finish();
        assert!(bytes.len() <= 8, "flush produced {} bytes", bytes.len());
    }

    #[test]
    fn uniform_symbols_round_trip() {
        let mut rng = SplitMix64::new(5);
        let symbols: Vec<u32> = (0..5000).map(|_| rng.next_below(41) as u32).collect();
        let mut enc = RangeEncoder::new();
        for &s in &symbols {
            enc.encode(s, 1, 41);
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        for &s in &symbols {
            let t = dec.decode_target(41);
            assert_eq!(t, s);
            dec.advance(t, 1, 41).unwrap();
        }
    }

    #[test]
    fn single_binary_symbol_is_tiny() {
        let mut enc = RangeEncoder::new();
        enc.encode(1, 1, 2);
        let bytes = enc.finish();
        assert!(bytes.len() <= 9, "got {}", bytes.len());
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        assert_eq!(dec.decode_target(2), 1);
    }

    #[test]
    fn literals_round_trip() {
        let values = [0u16, 1, 255, 256, 32767, 65535];
        let mut enc = RangeEncoder::new();
        for &v in &values {
            enc.encode_literal_u16(v);
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        for &v in &values {
            assert_eq!(dec.decode_literal_u16().unwrap(), v);
        }
    }

    #[test]
    fn exhausted_stream_is_an_error_not_a_panic() {
        assert!(RangeDecoder::new(&[]).is_err());
        let mut enc = RangeEncoder::new();
        for i in 0..100u32 {
            enc.encode(i % 7, 1, 7);
        }
        let bytes = enc.finish();
        let truncated = &bytes[..bytes.len() / 2];
        let mut dec = match RangeDecoder::new(truncated) {
            Ok(d) => d,
            Err(_) => return,
        };
        let mut hit_error = false;
        for _ in 0..100 {
            let t = dec.decode_target(7);
            if dec.advance(t, 1, 7).is_err() {
                hit_error = true;
                break;
            }
        }
        assert!(hit_error);
    }
}
