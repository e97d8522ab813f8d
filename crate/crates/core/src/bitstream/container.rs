//! Sectioned container: `"TVMC"`, a version byte, sections of
//! `[kind u8][length u32 LE][payload][CRC32 u32 LE]`, and a trailing CRC32 of
//! every preceding byte.

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TVMC";
pub const VERSION: u8 = 1;
/// Kind, length and checksum bytes around each payload.
pub const SECTION_OVERHEAD: usize = 9;
/// Magic, version and trailing checksum.
pub const FILE_OVERHEAD: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    Header,
    BaseMesh,
    Motion,
    Displacement,
}

impl SectionKind {
    fn to_u8(self) -> u8 {
        match self {
            SectionKind::Header => 0,
            SectionKind::BaseMesh => 1,
            SectionKind::Motion => 2,
            SectionKind::Displacement => 3,
        }
    }

    fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => SectionKind::Header,
            1 => SectionKind::BaseMesh,
            2 => SectionKind::Motion,
            3 => SectionKind::Displacement,
            _ => return None,
        })
    }
}

pub struct ContainerWriter {
    buf: Vec<u8>,
}

impl Default for ContainerWriter {
    fn default() -> Self {
        Self::new()
    }
}

impl ContainerWriter {
    pub fn new() -> Self {
        let mut buf = MAGIC.to_vec();
        buf.push(VERSION);
        ContainerWriter { buf }
    }

    pub fn push(&mut self, kind: SectionKind, payload: &[u8]) {
        self.buf.push(kind.to_u8());
        self.buf
            .extend_from_slice(&(payload.len() as u32).to_le_bytes());
        self.buf.extend_from_slice(payload);
        self.buf
            .extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
    }

    pub fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Section<'a> {
    pub kind: SectionKind,
    pub payload: &'a [u8],
}

/// Verifies the container and splits it into sections. Nothing is returned
/// unless every checksum matches.
pub fn read_container(bytes: &[u8]) -> Result<Vec<Section<'_>>> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < FILE_OVERHEAD {
        return Err(Error::Truncated("container"));
    }
    if bytes[4] != VERSION {
        return Err(Error::Version {
            found: bytes[4],
            expected: VERSION,
        });
    }
    let body_end = bytes.len() - 4;
    let trailer = u32::from_le_bytes(bytes[body_end..].try_into().unwrap());
    if crc32fast::hash(&bytes[..body_end]) != trailer {
        return Err(Error::Checksum("container".into()));
    }
    let mut sections = Vec::new();
    let mut pos = 5;
    while pos < body_end {
        if pos + 5 > body_end {
            return Err(Error::Truncated("section header"));
        }
        let kind = SectionKind::from_u8(bytes[pos])
            .ok_or_else(|| Error::Malformed(format!("unknown section kind {}", bytes[pos])))?;
        let len = u32::from_le_bytes(bytes[pos + 1..pos + 5].try_into().unwrap()) as usize;
        let start = pos + 5;
        let end = start
            .checked_add(len)
            .filter(|&e| e + 4 <= body_end)
            .ok_or(Error::Truncated("section payload"))?;
        let payload = &bytes[start..end];
        let crc = u32::from_le_bytes(bytes[end..end + 4].try_into().unwrap());
        if crc32fast::hash(payload) != crc {
            return Err(Error::Checksum(format!("section {} ({kind:?})", sections.len())));
        }
        sections.push(Section { kind, payload });
        pos = end + 4;
    }
    Ok(sections)
}

/// Little-endian field reader over a section payload.
pub struct PayloadReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        PayloadReader { data, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or(Error::Truncated("section field"))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn varint(&mut self) -> Result<u64> {
        crate::entropy::read_varint(self.data, &mut self.pos)
    }

    pub fn rest(&mut self) -> &'a [u8] {
        let s = &self.data[self.pos..];
        self.pos = self.data.len();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<u8> {
        let mut w = ContainerWriter::new();
        w.push(SectionKind::Header, b"hello");
        w.push(SectionKind::Motion, &[]);
        w.push(SectionKind::Displacement, &[1, 2, 3, 4]);
        w.finish()
    }

    #[test]
    fn lengths_add_up() {
        let bytes = sample();
        let sections = read_container(&bytes).unwrap();
        assert_eq!(sections.len(), 3);
        let payload: usize = sections.iter().map(|s| s.payload.len()).sum();
        assert_eq!(payload + 3 * SECTION_OVERHEAD + FILE_OVERHEAD, bytes.len());
        assert_eq!(sections[2].payload, &[1, 2, 3, 4]);
    }

    #[test]
    fn every_single_byte_corruption_is_detected() {
        let bytes = sample();
        for i in 0..bytes.len() {
            for flip in [0x01u8, 0x80, 0xff] {
                let mut bad = bytes.clone();
                bad[i] ^= flip;
                assert!(read_container(&bad).is_err(), "byte {i} flip {flip:#x}");
            }
        }
    }

    #[test]
    fn truncation_and_version() {
        let bytes = sample();
        assert!(read_container(&bytes[..bytes.len() - 1]).is_err());
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(matches!(read_container(&v), Err(Error::Version { found: 9, .. })));
        assert!(matches!(read_container(b"NOPE....."), Err(Error::BadMagic)));
    }
}
