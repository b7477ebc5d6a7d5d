//! Context-adaptive frequency model for the range coder.

use super::range::{RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};

/// Total count at which a context is rescaled (halved with floor 1).
pub const RESCALE_THRESHOLD: u32 = 1 << 13;

/// Per-context symbol frequencies, initialized to 1 so every symbol stays
/// codable; updated identically on the encode and decode paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveModel {
    alphabet: usize,
    freqs: Vec<Vec<u16>>,
    totals: Vec<u32>,
}

impl AdaptiveModel {
    pub fn new(contexts: usize, alphabet: usize) -> Self {
        assert!(alphabet >= 1 && alphabet as u32 <= RESCALE_THRESHOLD);
        assert!(contexts >= 1);
        Self {
            alphabet,
            freqs: vec![vec![1u16; alphabet]; contexts],
            totals: vec![alphabet as u32; contexts],
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn contexts(&self) -> usize {
        self.freqs.len()
    }

    /// Current (freq, total) of a symbol, before any update.
    pub fn probability(&self, ctx: usize, symbol: usize) -> (u32, u32) {
        (self.freqs[ctx][symbol] as u32, self.totals[ctx])
    }

    fn cumulative(&self, ctx: usize, symbol: usize) -> u32 {
        self.freqs[ctx][..symbol].iter().map(|&f| f as u32).sum()
    }

    fn update(&mut self, ctx: usize, symbol: usize) {
        self.freqs[ctx][symbol] += 1;
        self.totals[ctx] += 1;
        if self.totals[ctx] >= RESCALE_THRESHOLD {
            let mut total = 0u32;
            for f in &mut self.freqs[ctx] {
                *f = (*f / 2).max(1);
                total += *f as u32;
            }
            self.totals[ctx] = total;
        }
        debug_assert!(self.totals[ctx] <= (1 << 16) - self.alphabet as u32);
    }

    pub fn encode(&mut self, enc: &mut RangeEncoder, ctx: usize, symbol: usize) -> Result<()> {
        if symbol >= self.alphabet {
            return Err(Error::SymbolOutOfRange {
                symbol: symbol as i64,
                alphabet: self.alphabet,
            });
        }
        let cum = self.cumulative(ctx, symbol);
        let freq = self.freqs[ctx][symbol] as u32;
        enc.encode(cum, freq, self.totals[ctx]);
        self.update(ctx, symbol);
        Ok(())
    }

    pub fn decode(&mut self, dec: &mut RangeDecoder, ctx: usize) -> Result<usize> {
        let total = self.totals[ctx];
        let target = dec.decode_target(total);
        let mut cum = 0u32;
        let mut symbol = self.alphabet - 1;
        for (i, &f) in self.freqs[ctx].iter().enumerate() {
            let next = cum + f as u32;
            if target < next {
                symbol = i;
                break;
            }
            cum = next;
        }
        let freq = self.freqs[ctx][symbol] as u32;
        dec.advance(cum, freq, total)?;
        self.update(ctx, symbol);
        Ok(symbol)
    }
}
