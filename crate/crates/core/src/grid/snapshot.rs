//! Flat binary field snapshots with a JSON sidecar.
//!
//! `<stem>.bin` holds the named fields back to back, each as `nx*ny*nz`
//! little-endian `f64` values in row-major `[nx][ny][nz]` order.
//! `<stem>.json` records the grid and the field order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Grid, ScalarField};
use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub time: f64,
    pub layout: String,
    pub dtype: String,
    pub fields: Vec<String>,
}

const LAYOUT: &str = "row-major [nx][ny][nz]";
const DTYPE: &str = "f64-le";

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn write_snapshot(stem: &Path, time: f64, fields: &[(&str, &ScalarField)]) -> Result<()> {
    let Some((_, first)) = fields.first() else {
        return Err(LabError::domain("snapshot needs at least one field"));
    };
    let grid = first.grid();
    for (name, f) in fields {
        grid.check_same(f.grid(), name)?;
    }
    if let Some(dir) = stem.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut bytes = Vec::with_capacity(fields.len() * grid.len() * 8);
    for (_, f) in fields {
        for x in f.data() {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    fs::File::create(with_ext(stem, "bin"))?.write_all(&bytes)?;

    let meta = SnapshotMeta {
        nx: grid.nx(),
        ny: grid.ny(),
        nz: grid.nz(),
        lx: grid.lx(),
        ly: grid.ly(),
        lz: grid.lz(),
        time,
        layout: LAYOUT.into(),
        dtype: DTYPE.into(),
        fields: fields.iter().map(|(n, _)| n.to_string()).collect(),
    };
    fs::write(with_ext(stem, "json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_snapshot(stem: &Path) -> Result<(SnapshotMeta, Vec<(String, ScalarField)>)> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(with_ext(stem, "json"))?)?;
    if meta.layout != LAYOUT || meta.dtype != DTYPE {
        return Err(LabError::domain(format!(
            "unsupported snapshot layout {} / {}",
            meta.layout, meta.dtype
        )));
    }
    let grid = Grid::new(meta.nx, meta.ny, meta.nz, meta.lx, meta.ly)?;
    let bytes = fs::read(with_ext(stem, "bin"))?;
    let n = grid.len();
    if bytes.len() != meta.fields.len() * n * 8 {
        return Err(LabError::dimension(format!(
            "snapshot holds {} bytes, expected {}",
            bytes.len(),
            meta.fields.len() * n * 8
        )));
    }
    let fields = meta
        .fields
        .iter()
        .zip(bytes.chunks_exact(n * 8))
        .map(|(name, chunk)| {
            let data = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            Ok((name.clone(), ScalarField::from_vec(&grid, data)?))
        })
        .collect::<Result<_>>()?;
    Ok((meta, fields))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(4, 8, 2, 3.0, 5.0).unwrap();
        let a = ScalarField::from_fn(&g, |x, y, z| x.sin() + y * z + 1.0 / 3.0);
        let b = ScalarField::from_fn(&g, |x, _, _| x.exp());
        let stem = dir.path().join("snap");
        write_snapshot(&stem, 0.25, &[("a", &a), ("b", &b)]).unwrap();
        let (meta, fields) = read_snapshot(&stem).unwrap();
        assert_eq!(meta.time, 0.25);
        assert_eq!(meta.fields, vec!["a", "b"]);
        assert_eq!(fields[0].1.data(), a.data());
        assert_eq!(fields[1].1.data(), b.data());

        // row-major, vertical index fastest
        let raw = std::fs::read(dir.path().join("snap.bin")).unwrap();
        let second = f64::from_le_bytes(raw[8..16].try_into().unwrap());
        assert_eq!(second, a.data()[g.idx(0, 0, 1)]);
    }

    #[test]
    fn truncated_snapshot_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new_2d(4, 4, 1.0, 1.0).unwrap();
        let stem = dir.path().join("s");
        write_snapshot(&stem, 0.0, &[("f", &ScalarField::zeros(&g))]).unwrap();
        std::fs::write(dir.path().join("s.bin"), [0u8; 16]).unwrap();
        assert!(matches!(read_snapshot(&stem), Err(LabError::Dimension(_))));
    }
}
