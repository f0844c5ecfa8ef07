//! CSV, JSON and snapshot writers shared by the harness and the CLI.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::acoustic::AcousticState;
use crate::error::Result;
use crate::euler::FlowState;
use crate::grid;
use crate::target::TargetState;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated file with a header row; every value is written with [`fmt_f64`].
pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_flow_snapshot(stem: &Path, state: &FlowState) -> Result<()> {
    let (m0, m1, m2) = (state.mom.component(0), state.mom.component(1), state.mom.component(2));
    grid::write_snapshot(
        stem,
        state.time,
        &[("rho", &state.rho), ("m1", &m0), ("m2", &m1), ("m3", &m2)],
    )
}

pub fn write_target_snapshot(stem: &Path, state: &TargetState) -> Result<()> {
    grid::write_snapshot(stem, state.time, &[("q", &state.q), ("omega", &state.omega)])
}

pub fn write_acoustic_snapshot(stem: &Path, state: &AcousticState) -> Result<()> {
    let (v0, v1, v2) = (state.v.component(0), state.v.component(1), state.v.component(2));
    grid::write_snapshot(
        stem,
        state.time,
        &[("s", &state.s), ("v1", &v0), ("v2", &v1), ("v3", &v2)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17, "{s}");
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/x.csv");
        write_csv(&path, &["a".into(), "b".into()], vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[1], "1.0000000000000000e0,2.0000000000000000e0");
    }
}
