//! SPOS: the little-endian binary pose container.
//!
//! ```text
//! "SPOS" | version u16 = 1 | fps f32 | dims u8 | component_count u16
//!   per component: name_len u16, name, keypoint_count u16,
//!                  per keypoint: name_len u16, name
//! edge_count u16 | edges (u16, u16)* | frame_count u32
//! coords F*K*D f32 | confidence F*K f32
//! ```
//!
//! There is no padding and no trailing data; every sequence has exactly one
//! encoding.

use thiserror::Error;

use super::{Component, PoseError, PoseHeader, PoseSequence};

pub const MAGIC: &[u8; 4] = b"SPOS";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("bad magic at offset 0: expected \"SPOS\", found {found:?}")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported version {version} at offset {offset} (only version 1 is supported)")]
    UnsupportedVersion { offset: usize, version: u16 },
    #[error("truncated payload reading {field} at offset {offset}: expected {expected} bytes, got {actual}")]
    Truncated {
        field: &'static str,
        offset: usize,
        expected: usize,
        actual: usize,
    },
    #[error("data block size mismatch at offset {offset}: {frames} frames x {keypoints} keypoints need {expected} bytes in total, file has {actual}")]
    SizeMismatch {
        offset: usize,
        frames: usize,
        keypoints: usize,
        expected: usize,
        actual: usize,
    },
    #[error("invalid UTF-8 in {field} at offset {offset}")]
    InvalidUtf8 { field: &'static str, offset: usize },
    #[error("invalid pose data at offset {offset}: {source}")]
    Invalid {
        offset: usize,
        #[source]
        source: PoseError,
    },
    #[error("{field} does not fit the format: {value} exceeds {max}")]
    Overflow {
        field: &'static str,
        value: usize,
        max: usize,
    },
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() - self.pos < n {
            return Err(FormatError::Truncated {
                field,
                offset: self.pos,
                expected: self.pos + n,
                actual: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, field: &'static str) -> Result<u8, FormatError> {
        Ok(self.take(1, field)?[0])
    }

    fn u16(&mut self, field: &'static str) -> Result<u16, FormatError> {
        let b = self.take(2, field)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, FormatError> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32(&mut self, field: &'static str) -> Result<f32, FormatError> {
        Ok(f32::from_bits(self.u32(field)?))
    }

    fn string(&mut self, field: &'static str) -> Result<String, FormatError> {
        let len = usize::from(self.u16(field)?);
        let offset = self.pos;
        let raw = self.take(len, field)?;
        std::str::from_utf8(raw)
            .map(str::to_owned)
            .map_err(|_| FormatError::InvalidUtf8 { field, offset })
    }
}

/// Decodes an SPOS byte buffer.
pub fn read_pose(bytes: &[u8]) -> Result<PoseSequence, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic").map_err(|_| FormatError::BadMagic {
        found: bytes[..bytes.len().min(4)].to_vec(),
    })?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic { found: magic.to_vec() });
    }
    let version_offset = r.pos;
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion {
            offset: version_offset,
            version,
        });
    }
    let fps = r.f32("fps")?;
    let dims = r.u8("dims")?;
    let component_count = r.u16("component_count")?;
    let mut components = Vec::with_capacity(usize::from(component_count).min(1024));
    for _ in 0..component_count {
        let name = r.string("component name")?;
        let keypoint_count = r.u16("keypoint_count")?;
        let mut keypoints = Vec::with_capacity(usize::from(keypoint_count).min(1024));
        for _ in 0..keypoint_count {
            keypoints.push(r.string("keypoint name")?);
        }
        components.push(Component { name, keypoints });
    }
    let edge_count = r.u16("edge_count")?;
    let mut edges = Vec::with_capacity(usize::from(edge_count));
    for _ in 0..edge_count {
        let a = r.u16("edge")?;
        let b = r.u16("edge")?;
        edges.push((a, b));
    }
    let header_end = r.pos;
    let header = PoseHeader::new(fps, dims, components, edges)
        .map_err(|source| FormatError::Invalid { offset: 6, source })?;

    let frames = r.u32("frame_count")? as usize;
    let data_offset = r.pos;
    let k = header.keypoint_count();
    let d = header.dims();
    let expected = frames
        .checked_mul(k * (d + 1) * 4)
        .and_then(|n| n.checked_add(data_offset))
        .unwrap_or(usize::MAX);
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            field: "data block",
            offset: data_offset,
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(FormatError::SizeMismatch {
            offset: header_end,
            frames,
            keypoints: k,
            expected,
            actual: bytes.len(),
        });
    }
    let floats = |raw: &[u8]| -> Vec<f32> {
        raw.chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect()
    };
    let coords = floats(r.take(frames * k * d * 4, "coords")?);
    let conf_offset = r.pos;
    let confidence = floats(r.take(frames * k * 4, "confidence")?);
    PoseSequence::new(header, coords, confidence).map_err(|source| {
        let offset = match source {
            PoseError::ConfidenceOutOfRange { frame, keypoint, .. } => conf_offset + (frame * k + keypoint) * 4,
            PoseError::NonFiniteCoord { frame, keypoint } => data_offset + (frame * k + keypoint) * d * 4,
            _ => data_offset,
        };
        FormatError::Invalid { offset, source }
    })
}

fn put_u16(out: &mut Vec<u8>, value: usize, field: &'static str) -> Result<(), FormatError> {
    let v = u16::try_from(value).map_err(|_| FormatError::Overflow {
        field,
        value,
        max: usize::from(u16::MAX),
    })?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_str(out: &mut Vec<u8>, s: &str, field: &'static str) -> Result<(), FormatError> {
    put_u16(out, s.len(), field)?;
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

/// Size in bytes of the encoded header, up to and including `frame_count`.
pub fn header_size(header: &PoseHeader) -> usize {
    let names: usize = header
        .components()
        .iter()
        .map(|c| 2 + c.name.len() + 2 + c.keypoints.iter().map(|k| 2 + k.len()).sum::<usize>())
        .sum();
    4 + 2 + 4 + 1 + 2 + names + 2 + header.edges().len() * 4 + 4
}

/// Encodes a sequence canonically.
pub fn write_pose(seq: &PoseSequence) -> Result<Vec<u8>, FormatError> {
    let header = seq.header();
    let total = header_size(header) + 4 * (seq.coords().len() + seq.confidences().len());
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&header.fps().to_le_bytes());
    out.push(header.dims() as u8);
    put_u16(&mut out, header.components().len(), "component_count")?;
    for component in header.components() {
        put_str(&mut out, &component.name, "component name length")?;
        put_u16(&mut out, component.keypoints.len(), "keypoint_count")?;
        for keypoint in &component.keypoints {
            put_str(&mut out, keypoint, "keypoint name length")?;
        }
    }
    put_u16(&mut out, header.edges().len(), "edge_count")?;
    for &(a, b) in header.edges() {
        out.extend_from_slice(&a.to_le_bytes());
        out.extend_from_slice(&b.to_le_bytes());
    }
    let frames = u32::try_from(seq.frame_count()).map_err(|_| FormatError::Overflow {
        field: "frame_count",
        value: seq.frame_count(),
        max: u32::MAX as usize,
    })?;
    out.extend_from_slice(&frames.to_le_bytes());
    for v in seq.coords().iter().chain(seq.confidences()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    debug_assert_eq!(out.len(), total);
    Ok(out)
}
