//! `HSC1` cube files.
//!
//! ```text
//! 0   8  magic "HSC1CUBE"
//! 8   4  u32 format version (1)
//! 12  4  reserved, zero
//! 16  4  u32 height
//! 20  4  u32 width
//! 24  4  u32 bands
//! 28  1  u8 dtype (0 = f32)
//! 29  …  payload, band-sequential little-endian
//! …   4  optional: u32 length of a trailing JSON metadata block
//! …   …  JSON metadata
//! ```
//!
//! All integers are little-endian.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HsiCube;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HSC1CUBE";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 29;
const DTYPE_F32: u8 = 0;

#[derive(Debug, Default, Serialize, Deserialize)]
struct CubeMetadata {
    band_ids: Vec<String>,
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, message: message.into() }
}

pub fn encode_cube(cube: &HsiCube) -> Result<Vec<u8>> {
    let (h, w, m) = cube.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + cube.data().len() * 4 + 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for extent in [h, w, m] {
        let e = u32::try_from(extent).map_err(|_| format_err(out.len(), "extent exceeds u32"))?;
        out.extend_from_slice(&e.to_le_bytes());
    }
    out.push(DTYPE_F32);
    for v in cube.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let meta = serde_json::to_vec(&CubeMetadata { band_ids: cube.band_ids().to_vec() })?;
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    Ok(out)
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    let chunk = bytes
        .get(at..at + 4)
        .ok_or_else(|| format_err(bytes.len(), format!("truncated header: need u32 at byte {at}")))?;
    Ok(u32::from_le_bytes(chunk.try_into().expect("4 bytes")))
}

pub fn decode_cube(bytes: &[u8]) -> Result<HsiCube> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(format_err(0, "missing HSC1 magic"));
    }
    let version = read_u32(bytes, 8)?;
    if version != VERSION {
        return Err(format_err(8, format!("unsupported version {version}")));
    }
    let h = read_u32(bytes, 16)? as usize;
    let w = read_u32(bytes, 20)? as usize;
    let m = read_u32(bytes, 24)? as usize;
    let dtype = *bytes
        .get(28)
        .ok_or_else(|| format_err(bytes.len(), "truncated header: missing dtype byte"))?;
    if dtype != DTYPE_F32 {
        return Err(format_err(28, format!("unknown dtype code {dtype}")));
    }
    if h == 0 || w == 0 || m == 0 {
        return Err(format_err(16, format!("header declares empty cube {h}x{w}x{m}")));
    }
    let declared = h
        .checked_mul(w)
        .and_then(|v| v.checked_mul(m))
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| format_err(16, "declared extents overflow"))?;
    let available = bytes.len() - HEADER_LEN;
    if available < declared {
        return Err(format_err(
            bytes.len(),
            format!(
                "payload size mismatch: header declares {declared} bytes ({h}x{w}x{m} f32), \
                 file holds {available}"
            ),
        ));
    }
    let payload_end = HEADER_LEN + declared;
    let data: Vec<f32> = bytes[HEADER_LEN..payload_end]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();

    let mut band_ids = None;
    if payload_end < bytes.len() {
        let len = read_u32(bytes, payload_end)? as usize;
        let start = payload_end + 4;
        let block = bytes.get(start..start + len).ok_or_else(|| {
            format_err(
                bytes.len(),
                format!(
                    "metadata size mismatch: declares {len} bytes, file holds {}",
                    bytes.len().saturating_sub(start)
                ),
            )
        })?;
        if start + len != bytes.len() {
            return Err(format_err(start + len, "trailing bytes after metadata"));
        }
        let meta: CubeMetadata =
            serde_json::from_slice(block).map_err(|e| format_err(start, format!("bad metadata: {e}")))?;
        band_ids = Some(meta.band_ids);
    }
    match band_ids {
        Some(ids) if ids.len() == m => HsiCube::with_band_ids(h, w, m, data, ids),
        Some(ids) => Err(format_err(
            payload_end,
            format!("metadata lists {} band ids for {m} bands", ids.len()),
        )),
        None => HsiCube::new(h, w, m, data),
    }
}

pub fn save_cube(path: impl AsRef<Path>, cube: &HsiCube) -> Result<()> {
    fs::write(path, encode_cube(cube)?)?;
    Ok(())
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    decode_cube(&fs::read(path)?)
}
