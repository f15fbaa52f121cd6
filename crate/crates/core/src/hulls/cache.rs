//! Binary hull cache.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic        4 bytes  "WLHC"
//! version      u32
//! hull count   u64
//! master seed  u64
//! per hull:    source_n u64, v u32, v * 3 f64 (x, y, z per vertex)
//! trailer      u32  CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! Faces are not stored. Stream indices are not stored either; loaded hulls
//! are numbered by their position in the file.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{ConvexHull, HullError};

pub const CACHE_MAGIC: [u8; 4] = *b"WLHC";
pub const CACHE_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("not a hull cache (bad magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("unsupported hull cache version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("hull cache truncated: {0}")]
    Truncated(&'static str),
    #[error("hull cache checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("hull cache has {0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid hull record {index}: {source}")]
    Record { index: u64, source: HullError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Contents of a hull cache file.
#[derive(Debug, Clone, PartialEq)]
pub struct HullCache {
    pub master_seed: u64,
    pub hulls: Vec<ConvexHull>,
}

pub fn encode_hulls(master_seed: u64, hulls: &[ConvexHull]) -> Vec<u8> {
    let body: usize = hulls.iter().map(|h| 12 + 24 * h.vertex_count()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + body + 4);
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(hulls.len() as u64).to_le_bytes());
    out.extend_from_slice(&master_seed.to_le_bytes());
    for h in hulls {
        out.extend_from_slice(&h.source_n().to_le_bytes());
        out.extend_from_slice(&(h.vertex_count() as u32).to_le_bytes());
        for v in h.vertices() {
            for c in v {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CacheError> {
        if self.bytes.len() - self.pos < n {
            return Err(CacheError::Truncated(what));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &'static str) -> Result<f64, CacheError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_hulls(bytes: &[u8]) -> Result<HullCache, CacheError> {
    if bytes.len() < 4 {
        return Err(CacheError::Truncated("magic"));
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != CACHE_MAGIC {
        return Err(CacheError::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(CacheError::Truncated("header"));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32("version")?;
    if version != CACHE_VERSION {
        return Err(CacheError::Version {
            found: version,
            expected: CACHE_VERSION,
        });
    }
    let count = r.u64("hull count")?;
    let master_seed = r.u64("master seed")?;
    // Everything but the trailer is covered by the checksum.
    let payload_end = bytes.len() - 4;
    let mut body = Reader {
        bytes: &bytes[..payload_end],
        pos: r.pos,
    };
    let mut hulls = Vec::with_capacity(count.min(1 << 20) as usize);
    for index in 0..count {
        let source_n = body.u64("hull record")?;
        let v = body.u32("hull record")? as usize;
        if (body.bytes.len() - body.pos) / 24 < v {
            return Err(CacheError::Truncated("vertex data"));
        }
        let mut vertices = Vec::with_capacity(v);
        for _ in 0..v {
            vertices.push([
                body.f64("vertex")?,
                body.f64("vertex")?,
                body.f64("vertex")?,
            ]);
        }
        let hull = ConvexHull::from_vertices(vertices, source_n, index)
            .map_err(|source| CacheError::Record { index, source })?;
        hulls.push(hull);
    }
    if body.pos != payload_end {
        return Err(CacheError::TrailingBytes(payload_end - body.pos));
    }
    let stored = u32::from_le_bytes(bytes[payload_end..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..payload_end]);
    if stored != computed {
        return Err(CacheError::Checksum { stored, computed });
    }
    Ok(HullCache { master_seed, hulls })
}

pub fn save_hulls(
    path: impl AsRef<Path>,
    master_seed: u64,
    hulls: &[ConvexHull],
) -> Result<(), CacheError> {
    let bytes = encode_hulls(master_seed, hulls);
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    file.sync_all()?;
    Ok(())
}

pub fn load_hulls(path: impl AsRef<Path>) -> Result<HullCache, CacheError> {
    decode_hulls(&fs::read(path)?)
}
