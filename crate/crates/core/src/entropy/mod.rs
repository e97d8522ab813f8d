//! Entropy coding of binary symbols and integer fields.
//!
//! A binary stream is `[varint symbol count][mode byte][payload]`. Mode 0 is a
//! range-coded payload, mode 1 stores the bits verbatim (MSB first) and is
//! chosen whenever the coder would expand the data. An empty stream is the
//! single byte `0`.
//!
//! Integers are binarized as signed Exp-Golomb: a non-zero flag, a sign bit,
//! then the unary prefix and binary suffix of `|v| - 1`, every bin modelled
//! by its own adaptive context inside a per-class context block.

mod bits;
mod range;
mod varint;

use crate::motion::MotionField;
use crate::subdivision::QuantizedField;
use crate::{Error, Result, Vec3};

pub use self::bits::{BitReader, BitWriter};
pub use self::range::{AdaptiveModel, ModelTable, RangeDecoder, RangeEncoder, COUNT_CAP};
pub use self::varint::{read_varint, write_varint};

const MODE_CODED: u8 = 0;
const MODE_RAW: u8 = 1;

/// Collects `(context, bit)` symbols and produces a binary stream.
#[derive(Debug, Default)]
pub struct BinaryEncoder {
    symbols: Vec<(usize, bool)>,
}

impl BinaryEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, ctx: usize, bit: bool) {
        self.symbols.push((ctx, bit));
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn finish(self) -> Vec<u8> {
        ac_encode(&self.symbols)
    }
}

/// Range-codes the symbols, falling back to raw bits when that is smaller.
pub fn ac_encode(symbols: &[(usize, bool)]) -> Vec<u8> {
    let mut out = Vec::new();
    write_varint(&mut out, symbols.len() as u64);
    if symbols.is_empty() {
        return out;
    }
    let mut models = ModelTable::default();
    let mut enc = RangeEncoder::new();
    for &(ctx, bit) in symbols {
        enc.encode(models.get(ctx), bit);
    }
    let coded = enc.finish();
    let raw_len = symbols.len().div_ceil(8);
    if coded.len() <= raw_len {
        out.push(MODE_CODED);
        out.extend_from_slice(&coded);
    } else {
        out.push(MODE_RAW);
        let mut raw = vec![0u8; raw_len];
        for (i, &(_, bit)) in symbols.iter().enumerate() {
            if bit {
                raw[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out.extend_from_slice(&raw);
    }
    out
}

/// Decodes a stream given the context of every symbol.
pub fn ac_decode(bytes: &[u8], contexts: &[usize]) -> Result<Vec<bool>> {
    let mut dec = BinaryDecoder::new(bytes)?;
    if dec.len() != contexts.len() {
        return Err(Error::Malformed(format!(
            "stream holds {} symbols, schedule has {}",
            dec.len(),
            contexts.len()
        )));
    }
    contexts.iter().map(|&c| dec.decode(c)).collect()
}

enum Payload<'a> {
    Empty,
    Coded(RangeDecoder<'a>),
    Raw(&'a [u8]),
}

/// Pull decoder for a binary stream; the caller supplies the context of each
/// symbol as decoding proceeds.
pub struct BinaryDecoder<'a> {
    count: usize,
    next: usize,
    models: ModelTable,
    payload: Payload<'a>,
    header_len: usize,
}

impl<'a> BinaryDecoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self> {
        let mut pos = 0;
        let count = read_varint(bytes, &mut pos)? as usize;
        let payload = if count == 0 {
            Payload::Empty
        } else {
            let mode = *bytes.get(pos).ok_or(Error::Truncated("binary stream mode"))?;
            pos += 1;
            match mode {
                MODE_CODED => Payload::Coded(RangeDecoder::new(&bytes[pos..])?),
                MODE_RAW => {
                    let n = count.div_ceil(8);
                    let raw = bytes
                        .get(pos..pos + n)
                        .ok_or(Error::Truncated("raw binary payload"))?;
                    Payload::Raw(raw)
                }
                other => return Err(Error::Malformed(format!("unknown stream mode {other}"))),
            }
        };
        Ok(BinaryDecoder {
            count,
            next: 0,
            models: ModelTable::default(),
            payload,
            header_len: pos,
        })
    }

    /// Number of symbols in the stream.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn decode(&mut self, ctx: usize) -> Result<bool> {
        if self.next >= self.count {
            return Err(Error::Truncated("read past the last symbol"));
        }
        let i = self.next;
        self.next += 1;
        match &mut self.payload {
            Payload::Empty => unreachable!(),
            Payload::Coded(dec) => dec.decode(self.models.get(ctx)),
            Payload::Raw(raw) => Ok(raw[i / 8] & (0x80 >> (i % 8)) != 0),
        }
    }

    /// Bytes of the input covered by this stream.
    pub fn byte_len(&self) -> usize {
        self.header_len
            + match &self.payload {
                Payload::Empty => 0,
                Payload::Coded(d) => d.consumed(),
                Payload::Raw(r) => r.len(),
            }
    }

    /// Errors unless every symbol was consumed.
    pub fn finish(self) -> Result<()> {
        if self.next != self.count {
            return Err(Error::Malformed(format!(
                "{} of {} symbols left undecoded",
                self.count - self.next,
                self.count
            )));
        }
        Ok(())
    }
}

/// Contexts used by one integer class.
pub const CLASS_CONTEXTS: usize = 99;
const CTX_NONZERO: usize = 0;
const CTX_SIGN: usize = 1;
const CTX_PREFIX: usize = 2;
const CTX_SUFFIX: usize = 34;
const CTX_SUFFIX_REST: usize = 98;

/// Writes `v` as signed Exp-Golomb into context block `class`.
pub fn encode_signed(enc: &mut BinaryEncoder, class: usize, v: i32) {
    let base = class * CLASS_CONTEXTS;
    enc.encode(base + CTX_NONZERO, v != 0);
    if v == 0 {
        return;
    }
    enc.encode(base + CTX_SIGN, v < 0);
    let m = v.unsigned_abs() as u64; // |v| - 1 + 1
    let k = 63 - m.leading_zeros() as usize;
    for i in 0..k {
        enc.encode(base + CTX_PREFIX + i, true);
    }
    if k < 32 {
        enc.encode(base + CTX_PREFIX + k, false);
    }
    for j in (0..k).rev() {
        let pos = k - 1 - j;
        let ctx = if pos < 2 {
            CTX_SUFFIX + 2 * k + pos
        } else {
            CTX_SUFFIX_REST
        };
        enc.encode(base + ctx, (m >> j) & 1 == 1);
    }
}

pub fn decode_signed(dec: &mut BinaryDecoder<'_>, class: usize) -> Result<i32> {
    let base = class * CLASS_CONTEXTS;
    if !dec.decode(base + CTX_NONZERO)? {
        return Ok(0);
    }
    let negative = dec.decode(base + CTX_SIGN)?;
    let mut k = 0;
    while k < 32 && dec.decode(base + CTX_PREFIX + k)? {
        k += 1;
    }
    let mut m = 1u64;
    for pos in 0..k {
        let ctx = if pos < 2 {
            CTX_SUFFIX + 2 * k + pos
        } else {
            CTX_SUFFIX_REST
        };
        m = (m << 1) | dec.decode(base + ctx)? as u64;
    }
    let v = if negative { -(m as i64) } else { m as i64 };
    i32::try_from(v).map_err(|_| Error::Malformed(format!("decoded magnitude {v} out of range")))
}

/// Uniform grid on which motion vectors are transmitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionGrid {
    pub step: f64,
}

impl MotionGrid {
    /// `2^bits` cells across `extent` model units.
    pub fn new(extent: f64, bits: u32) -> Self {
        let extent = if extent > 0.0 { extent } else { 1.0 };
        MotionGrid {
            step: extent / (1u64 << bits) as f64,
        }
    }

    pub fn quantize(&self, m: &MotionField) -> Result<Vec<[i32; 3]>> {
        m.0.iter()
            .map(|v| {
                let mut q = [0i32; 3];
                for k in 0..3 {
                    let x = (v[k] / self.step).round();
                    if !(x >= i32::MIN as f64 && x <= i32::MAX as f64) {
                        return Err(Error::QuantOverflow { value: x });
                    }
                    q[k] = x as i32;
                }
                Ok(q)
            })
            .collect()
    }

    pub fn dequantize(&self, q: &[[i32; 3]]) -> MotionField {
        MotionField(
            q.iter()
                .map(|c| Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.step)
                .collect(),
        )
    }
}

/// `[varint vertex count][binary stream]` with one context class per axis.
pub fn encode_motion_ints(q: &[[i32; 3]]) -> Vec<u8> {
    let mut out = Vec::new();
    write_varint(&mut out, q.len() as u64);
    let mut enc = BinaryEncoder::new();
    for v in q {
        for (k, &c) in v.iter().enumerate() {
            encode_signed(&mut enc, k, c);
        }
    }
    out.extend(enc.finish());
    out
}

pub fn decode_motion_ints(bytes: &[u8]) -> Result<Vec<[i32; 3]>> {
    let mut pos = 0;
    let n = read_varint(bytes, &mut pos)? as usize;
    let mut dec = BinaryDecoder::new(&bytes[pos..])?;
    let mut out = Vec::with_capacity(n.min(bytes.len() * 8));
    for _ in 0..n {
        let mut v = [0i32; 3];
        for (k, c) in v.iter_mut().enumerate() {
            *c = decode_signed(&mut dec, k)?;
        }
        out.push(v);
    }
    dec.finish()?;
    Ok(out)
}

/// Quantizes `m` on `grid` and codes it.
pub fn encode_motion_field(m: &MotionField, grid: &MotionGrid) -> Result<Vec<u8>> {
    Ok(encode_motion_ints(&grid.quantize(m)?))
}

pub fn decode_motion_field(bytes: &[u8], grid: &MotionGrid) -> Result<MotionField> {
    Ok(grid.dequantize(&decode_motion_ints(bytes)?))
}

/// Valence classes used to key displacement contexts.
pub const VALENCE_BUCKETS: usize = 5;

pub fn valence_bucket(valence: usize) -> usize {
    valence.clamp(4, 8) - 4
}

/// `[varint vertex count][binary stream]`; contexts are keyed by axis and the
/// vertex's valence bucket.
pub fn encode_displacement_field(q: &QuantizedField, valences: &[usize]) -> Result<Vec<u8>> {
    if valences.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "{} displacements but {} valences",
            q.len(),
            valences.len()
        )));
    }
    let mut out = Vec::new();
    write_varint(&mut out, q.len() as u64);
    let mut enc = BinaryEncoder::new();
    for (v, &val) in q.0.iter().zip(valences) {
        let bucket = valence_bucket(val);
        for (k, &c) in v.iter().enumerate() {
            encode_signed(&mut enc, k * VALENCE_BUCKETS + bucket, c);
        }
    }
    out.extend(enc.finish());
    Ok(out)
}

pub fn decode_displacement_field(bytes: &[u8], valences: &[usize]) -> Result<QuantizedField> {
    let mut pos = 0;
    let n = read_varint(bytes, &mut pos)? as usize;
    if n != valences.len() {
        return Err(Error::Malformed(format!(
            "displacement stream has {n} vertices, mesh has {}",
            valences.len()
        )));
    }
    let mut dec = BinaryDecoder::new(&bytes[pos..])?;
    let mut out = Vec::with_capacity(n);
    for &val in valences {
        let bucket = valence_bucket(val);
        let mut v = [0i32; 3];
        for (k, c) in v.iter_mut().enumerate() {
            *c = decode_signed(&mut dec, k * VALENCE_BUCKETS + bucket)?;
        }
        out.push(v);
    }
    dec.finish()?;
    Ok(QuantizedField(out))
}
