//! CSV tables and the run summary on disk.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nullwave_core::chaplygin::FlowReport;
use nullwave_core::diagnostics::DiagnosticsReport;
use nullwave_core::grid::RadialGrid;
use nullwave_core::solver::run::Snapshot;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A file written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
}

/// Collects the files of one run in the order they were written.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    pub manifest: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::write(root, e))?;
        Ok(OutputDir { root: root.to_owned(), manifest: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes a table with one header row.
    pub fn csv(&mut self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.root.join(name);
        let io = |e: csv::Error| CliError::write(&path, e.into());
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::write(&path, e))?;
        self.record(name)
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let path = self.root.join(name);
        let bytes = fs::metadata(&path).map_err(|e| CliError::write(&path, e))?.len();
        self.manifest.push(ManifestEntry { file: name.to_owned(), bytes });
        Ok(())
    }

    /// Writes `value` as pretty JSON through a temporary file and a rename,
    /// so readers never see a partial file.
    pub fn json_atomic<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let text = serde_json::to_string_pretty(value).expect("summary serializes");
        let mut f = fs::File::create(&tmp).map_err(|e| CliError::write(&tmp, e))?;
        f.write_all(text.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| CliError::write(&tmp, e))?;
        f.sync_all().map_err(|e| CliError::write(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::write(&path, e))
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn names(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Diagnostics table. Hierarchy entries are filled on the rows sampled at
/// their time and left empty elsewhere.
pub fn diagnostics_table(report: &DiagnosticsReport, local_radius: f64) -> (Vec<String>, Vec<Vec<String>>) {
    let energies: Vec<String> = report.hierarchy.first().map(|h| h.entries.iter().map(|(n, _)| n.clone()).collect()).unwrap_or_default();
    let mut header = vec!["t".to_owned(), "E00".to_owned()];
    header.extend(energies.iter().cloned());
    header.extend(names(&["kss_lhs", "kss_rhs"]));
    header.push(format!("localE_r{local_radius}"));
    header.extend(names(&["envelope_D", "sup_du", "blowup_flag"]));
    let tol = 0.5 * report.dt;
    let rows = report
        .rows
        .iter()
        .map(|row| {
            let mut out = vec![num(row.t), num(row.e00)];
            let h = report.hierarchy.iter().find(|h| (h.t - row.t).abs() <= tol);
            for name in &energies {
                out.push(h.and_then(|h| h.entries.iter().find(|(n, _)| n == name)).map_or_else(String::new, |(_, v)| num(*v)));
            }
            out.extend([row.kss_lhs, row.kss_rhs, row.local_energy, row.envelope, row.sup_du].map(num));
            out.push(if row.blowup { "1" } else { "0" }.to_owned());
            out
        })
        .collect();
    (header, rows)
}

pub fn snapshot_table(grid: &RadialGrid, snap: &Snapshot) -> (Vec<String>, Vec<Vec<String>>) {
    let rows = (0..grid.len()).map(|j| vec![num(grid.r(j)), num(snap.u[j]), num(snap.u_t[j]), num(snap.u_r[j])]).collect();
    (names(&["r", "u", "du_dt", "du_dr"]), rows)
}

pub fn flow_table(flow: &FlowReport) -> (Vec<String>, Vec<Vec<String>>) {
    let rows = flow
        .samples
        .iter()
        .map(|s| [s.t, s.rho_min, s.rho_max, s.max_speed, s.slip_residual].map(num).to_vec())
        .collect();
    (names(&["t", "rho_min", "rho_max", "max_speed", "slip_residual"]), rows)
}

/// File name of the snapshot at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t}.csv")
}
