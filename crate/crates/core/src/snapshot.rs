//! Flat binary field records.
//!
//! Layout, all little-endian: `n: u64`, `L: f64`, `components: u64` (16),
//! then `16 n^3` complex values as interleaved `re, im` f64 pairs,
//! component-major with point index `(i n + j) n + k`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clifford::C64;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpinorField};

pub const HEADER_BYTES: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format: String,
    pub n: usize,
    #[serde(rename = "box")]
    pub box_len: f64,
    pub components: usize,
    pub layout: String,
    pub byte_order: String,
    pub bytes: usize,
    pub norm: f64,
}

impl SnapshotMeta {
    pub fn of(f: &SpinorField) -> Self {
        let n = f.grid.n();
        SnapshotMeta {
            format: "dirac2b-spinor-field".into(),
            n,
            box_len: f.grid.box_len(),
            components: 16,
            layout: "component-major; point (i*n+j)*n+k; interleaved re,im".into(),
            byte_order: "little-endian".into(),
            bytes: HEADER_BYTES + 16 * f.grid.points() * 16,
            norm: f.norm(),
        }
    }
}

pub fn encode(f: &SpinorField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + f.data.len() * 16);
    out.extend((f.grid.n() as u64).to_le_bytes());
    out.extend(f.grid.box_len().to_le_bytes());
    out.extend(16u64.to_le_bytes());
    for z in &f.data {
        out.extend(z.re.to_le_bytes());
        out.extend(z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<SpinorField> {
    let bad = |m: &str| Error::Snapshot(m.to_string());
    if bytes.len() < HEADER_BYTES {
        return Err(bad("truncated header"));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8-byte slice") };
    let n = u64::from_le_bytes(word(0)) as usize;
    let box_len = f64::from_le_bytes(word(1));
    let comps = u64::from_le_bytes(word(2));
    if comps != 16 {
        return Err(bad(&format!("expected 16 components, found {comps}")));
    }
    let grid = GridSpec::new(n, box_len)?;
    let len = 16 * grid.points();
    if bytes.len() != HEADER_BYTES + 16 * len {
        return Err(bad(&format!("expected {} bytes, found {}", HEADER_BYTES + 16 * len, bytes.len())));
    }
    let data = bytes[HEADER_BYTES..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8-byte slice"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8-byte slice"));
            C64::new(re, im)
        })
        .collect();
    Ok(SpinorField { grid, data })
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write(f: &SpinorField, stem: &Path) -> Result<SnapshotMeta> {
    let meta = SnapshotMeta::of(f);
    std::fs::File::create(stem.with_extension("bin"))?.write_all(&encode(f))?;
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Snapshot(e.to_string()))?;
    std::fs::write(stem.with_extension("json"), json)?;
    Ok(meta)
}

pub fn read(stem: &Path) -> Result<SpinorField> {
    let mut bytes = Vec::new();
    std::fs::File::open(stem.with_extension("bin"))?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> SpinorField {
        let grid = GridSpec::new(4, 3.0).unwrap();
        SpinorField {
            grid,
            data: (0..16 * grid.points()).map(|i| C64::new(i as f64 * 0.25, -(i as f64).sqrt())).collect(),
        }
    }

    #[test]
    fn header_layout() {
        let b = encode(&field());
        assert_eq!(&b[..8], &4u64.to_le_bytes());
        assert_eq!(&b[8..16], &3.0f64.to_le_bytes());
        assert_eq!(&b[16..24], &16u64.to_le_bytes());
        assert_eq!(&b[24 + 16..24 + 24], &0.25f64.to_le_bytes());
        assert_eq!(b.len(), SnapshotMeta::of(&field()).bytes);
    }

    #[test]
    fn roundtrip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("psi");
        let meta = write(&field(), &stem).unwrap();
        assert_eq!(read(&stem).unwrap(), field());
        let json: SnapshotMeta = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
        assert_eq!(json, meta);
    }

    #[test]
    fn corrupt_records_rejected() {
        let mut b = encode(&field());
        assert!(decode(&b[..10]).is_err());
        b.pop();
        assert!(decode(&b).is_err());
        let mut b = encode(&field());
        b[16] = 3;
        assert!(decode(&b).is_err());
    }
}
