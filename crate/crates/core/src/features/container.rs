//! Binary feature dump.
//!
//! Layout (little-endian): 8-byte magic `SPKFEAT\0`, `u32` version, `u32`
//! reserved (zero), `u32` frames, `u32` dims, then `frames × dims` `f64`
//! values in row-major order.

use std::io::{Read, Write};

use super::{FeatureError, FeatureMatrix};

pub const FEATURE_MAGIC: &[u8; 8] = b"SPKFEAT\0";
pub const FEATURE_VERSION: u32 = 1;

pub fn write_features<W: Write>(mut w: W, m: &FeatureMatrix) -> Result<(), FeatureError> {
    let frames = u32::try_from(m.frames()).map_err(|_| FeatureError::Format("too many frames".into()))?;
    let dims = u32::try_from(m.dims()).map_err(|_| FeatureError::Format("too many dims".into()))?;
    let mut buf = Vec::with_capacity(24 + m.values().len() * 8);
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&frames.to_le_bytes());
    buf.extend_from_slice(&dims.to_le_bytes());
    for v in m.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_features<R: Read>(mut r: R) -> Result<FeatureMatrix, FeatureError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 24 || &bytes[..8] != FEATURE_MAGIC {
        return Err(FeatureError::Format("bad magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(8);
    if version != FEATURE_VERSION {
        return Err(FeatureError::Format(format!("unsupported version {version}")));
    }
    let frames = word(16) as usize;
    let dims = word(20) as usize;
    let payload = &bytes[24..];
    if payload.len() != frames * dims * 8 {
        return Err(FeatureError::Format(format!(
            "expected {} payload bytes, found {}",
            frames * dims * 8,
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::new(frames, dims, values)
}
