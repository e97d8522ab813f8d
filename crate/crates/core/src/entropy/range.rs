//! Binary range coder with adaptive frequency-count contexts.
//!
//! 32-bit range, 33-bit low with carry propagation through a cached byte,
//! renormalization whenever the range drops below 2^24. All arithmetic is
//! integer so streams are bit-exact across platforms.

use crate::{Error, Result};

const TOP: u32 = 1 << 24;
/// Counts are halved once their sum exceeds this.
pub const COUNT_CAP: u32 = 1 << 16;

/// Adaptive probability state of one binary context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveModel {
    pub zeros: u32,
    pub ones: u32,
}

impl Default for AdaptiveModel {
    fn default() -> Self {
        AdaptiveModel { zeros: 1, ones: 1 }
    }
}

impl AdaptiveModel {
    pub fn p_zero(&self) -> f64 {
        self.zeros as f64 / (self.zeros + self.ones) as f64
    }

    fn split(&self, range: u32) -> u32 {
        let total = (self.zeros + self.ones) as u64;
        ((range as u64 * self.zeros as u64) / total) as u32
    }

    pub fn update(&mut self, bit: bool) {
        if bit {
            self.ones += 1;
        } else {
            self.zeros += 1;
        }
        if self.zeros + self.ones > COUNT_CAP {
            self.zeros = self.zeros.div_ceil(2);
            self.ones = self.ones.div_ceil(2);
        }
    }
}

/// Grows on demand so callers can use sparse context ids.
#[derive(Debug, Clone, Default)]
pub struct ModelTable(Vec<AdaptiveModel>);

impl ModelTable {
    pub fn get(&mut self, ctx: usize) -> &mut AdaptiveModel {
        if ctx >= self.0.len() {
            self.0.resize(ctx + 1, AdaptiveModel::default());
        }
        &mut self.0[ctx]
    }
}

#[derive(Debug)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    pending: u64,
    out: Vec<u8>,
    first: bool,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: u32::MAX,
            cache: 0,
            pending: 1,
            out: Vec::new(),
            first: true,
        }
    }

    pub fn encode(&mut self, model: &mut AdaptiveModel, bit: bool) {
        let bound = model.split(self.range);
        if bit {
            self.low += bound as u64;
            self.range -= bound;
        } else {
            self.range = bound;
        }
        model.update(bit);
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn emit(&mut self, byte: u8) {
        // The very first byte is always zero; the decoder implies it.
        if self.first {
            debug_assert_eq!(byte, 0);
            self.first = false;
        } else {
            self.out.push(byte);
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.emit(byte.wrapping_add(carry));
                byte = 0xFF;
                self.pending -= 1;
                if self.pending == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> 24) & 0xFF) as u8;
        }
        self.pending += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

#[derive(Debug)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self> {
        let mut d = RangeDecoder {
            data,
            pos: 0,
            code: 0,
            range: u32::MAX,
        };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte()? as u32;
        }
        Ok(d)
    }

    fn next_byte(&mut self) -> Result<u8> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or(Error::Truncated("range coder payload"))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn decode(&mut self, model: &mut AdaptiveModel) -> Result<bool> {
        let bound = model.split(self.range);
        let bit = if self.code < bound {
            self.range = bound;
            false
        } else {
            self.code -= bound;
            self.range -= bound;
            true
        };
        model.update(bit);
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | self.next_byte()? as u32;
        }
        Ok(bit)
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}
