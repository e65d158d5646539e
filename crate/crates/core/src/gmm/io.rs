//! Binary model file.
//!
//! Layout (little-endian): 8-byte magic `SPKGMM\0\0`, `u32` version, `u32`
//! reserved (zero), `u32` components, `u32` dims, then `f64` arrays: weights,
//! means (row-major), variances (row-major), per-dimension variance floor.

use std::io::{Read, Write};

use super::{GmmError, GmmModel};

pub const GMM_MAGIC: &[u8; 8] = b"SPKGMM\0\0";
pub const GMM_VERSION: u32 = 1;

pub fn write_model<W: Write>(mut w: W, m: &GmmModel) -> Result<(), GmmError> {
    let (k, d) = (m.n_components(), m.dims());
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| GmmError::Format("model too large".into()));
    let mut buf = Vec::with_capacity(24 + 8 * (k + 2 * k * d + d));
    buf.extend_from_slice(GMM_MAGIC);
    buf.extend_from_slice(&GMM_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&to_u32(k)?.to_le_bytes());
    buf.extend_from_slice(&to_u32(d)?.to_le_bytes());
    let means = (0..k).flat_map(|c| m.mean(c).iter());
    let vars = (0..k).flat_map(|c| m.variance(c).iter());
    for v in m.weights().iter().chain(means).chain(vars).chain(m.variance_floor()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_model<R: Read>(mut r: R) -> Result<GmmModel, GmmError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 24 || &bytes[..8] != GMM_MAGIC {
        return Err(GmmError::Format("bad magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    if word(8) != GMM_VERSION as usize {
        return Err(GmmError::Format(format!("unsupported version {}", word(8))));
    }
    let (k, d) = (word(16), word(20));
    let expected = k
        .checked_mul(d)
        .and_then(|kd| kd.checked_mul(2))
        .and_then(|v| v.checked_add(k + d))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| GmmError::Format("header counts overflow".into()))?;
    let payload = &bytes[24..];
    if payload.len() != expected {
        return Err(GmmError::Format(format!(
            "expected {expected} payload bytes, found {}",
            payload.len()
        )));
    }
    let vals: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (weights, rest) = vals.split_at(k);
    let (means, rest) = rest.split_at(k * d);
    let (vars, floor) = rest.split_at(k * d);
    GmmModel::from_flat(d, weights.to_vec(), means.to_vec(), vars.to_vec(), floor.to_vec())
}
