//! Result files: `series.csv`, `snapshot_<t>.csv` and `result.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::solver::GridState;

use super::run::RunResult;

pub const SERIES_COLUMNS: [&str; 16] = [
    "t",
    "dt",
    "mass_h",
    "mass_gamma",
    "energy",
    "diss_cap",
    "diss_mar",
    "diss_dif",
    "diss_theta",
    "jf_norm",
    "js_norm",
    "min_h",
    "min_gamma",
    "holder_pair_ratio",
    "holder_sup_ratio",
    "newton_iters",
];

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn series_row(r: &DiagnosticsRecord) -> Vec<String> {
    let d = &r.dissipation;
    let mut row: Vec<String> = [
        r.t,
        r.dt,
        r.mass_h,
        r.mass_gamma,
        r.energy,
        d.cap,
        d.mar,
        d.dif,
        d.diss_theta,
        r.jf_norm,
        r.js_norm,
        r.min_h,
        r.min_gamma,
        r.holder.worst_pair_ratio,
        r.holder.sup_ratio,
    ]
    .iter()
    .map(|&v| fmt_float(v))
    .collect();
    row.push(r.newton_iters.to_string());
    row
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per record, the initial state first.
pub fn write_series(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_csv(path, &SERIES_COLUMNS, records.iter().map(series_row))
}

/// `snapshot_<t>.csv` with columns `x,h,gamma`; returns the path written.
pub fn write_snapshot(dir: &Path, state: &GridState) -> Result<PathBuf> {
    let path = dir.join(format!("snapshot_{:.6e}.csv", state.t));
    let mesh = state.mesh();
    let rows = (0..mesh.n()).map(|j| {
        vec![
            fmt_float(mesh.center(j)),
            fmt_float(state.h.values()[j]),
            fmt_float(state.gamma.values()[j]),
        ]
    });
    write_csv(&path, &["x", "h", "gamma"], rows)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Argument(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the series, the initial and final snapshots and `result.json`.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let series = dir.join("series.csv");
    write_series(&series, &result.records)?;
    let mut written = vec![series];
    written.push(write_snapshot(dir, &result.trajectory.initial)?);
    if !result.trajectory.steps.is_empty() {
        written.push(write_snapshot(dir, result.final_state())?);
    }
    let json = dir.join("result.json");
    write_json(&json, result)?;
    written.push(json);
    Ok(written)
}
