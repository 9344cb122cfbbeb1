use super::families::MetricFamily;
use super::grid::{Field, GridSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// JSON sidecar written next to a raw `.f64` dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldSidecar {
    pub family_id: String,
    pub params: serde_json::Value,
    pub n: usize,
    pub periods: [f64; 4],
    pub rank: u32,
    pub sha256: String,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("f64"), stem.with_extension("json"))
}

/// Write `<stem>.f64` (little-endian, row-major) and `<stem>.json`.
pub fn dump_field(field: &Field, family: &MetricFamily, stem: &Path) -> Result<FieldSidecar> {
    let bytes: Vec<u8> = field.data().iter().flat_map(|x| x.to_le_bytes()).collect();
    let sidecar = FieldSidecar {
        family_id: family.family_id().to_string(),
        params: family.params(),
        n: field.spec().n(),
        periods: field.spec().periods(),
        rank: field.rank(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    let (data_path, meta_path) = paths(stem);
    if let Some(dir) = data_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&data_path, &bytes)?;
    std::fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(sidecar)
}

/// Read a dump back, checking its digest.
pub fn load_field(stem: &Path) -> Result<(Field, FieldSidecar)> {
    let (data_path, meta_path) = paths(stem);
    let sidecar: FieldSidecar = serde_json::from_str(&std::fs::read_to_string(meta_path)?)?;
    let bytes = std::fs::read(data_path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    if digest != sidecar.sha256 {
        return Err(Error::ShapeError(format!("digest mismatch: {digest} vs {}", sidecar.sha256)));
    }
    if bytes.len() % 8 != 0 {
        return Err(Error::ShapeError("dump length is not a multiple of 8".into()));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let spec = GridSpec::with_periods(sidecar.n, sidecar.periods)?;
    Ok((Field::new(spec, sidecar.rank, data)?, sidecar))
}
