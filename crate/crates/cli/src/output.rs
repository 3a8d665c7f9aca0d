//! Output artifacts, plot descriptors and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use sclaw_core::harness::fmt_f64;

pub const MANIFEST: &str = "manifest.json";

/// Files produced by one command, written together at the end.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }

    /// Writes every file plus `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path, config: serde_json::Value, seed: u64) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut entries = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            entries.push(FileEntry {
                name: name.clone(),
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = Manifest {
            config,
            seed,
            files: entries,
            versions: Versions {
                sclaw: env!("CARGO_PKG_VERSION").to_string(),
                manifest: 1,
            },
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = dir.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[derive(Debug, Serialize)]
struct Manifest {
    config: serde_json::Value,
    seed: u64,
    files: Vec<FileEntry>,
    versions: Versions,
}

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Versions {
    sclaw: String,
    manifest: u32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    EpsLogP,
    MomentScan,
    ErrorLadder,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::EpsLogP => "eps_log_p",
            PlotKind::MomentScan => "moment_scan",
            PlotKind::ErrorLadder => "error_ladder",
        }
    }
}

/// Numeric table with named columns; the first column is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

struct Series {
    label: String,
    columns: Vec<String>,
}

/// Adds `<kind>.csv` and `<kind>.plot.txt` to `out`.
pub fn emit_plot_data(out: &mut Artifacts, table: &PlotTable, kind: PlotKind) -> CliResult<()> {
    if table.rows.is_empty() || table.columns.len() < 2 {
        return Err(CliError::Config(format!(
            "plot table for {} is empty",
            kind.name()
        )));
    }
    if table.rows.iter().any(|r| r.len() != table.columns.len()) {
        return Err(CliError::Config(format!(
            "plot table for {} has ragged rows",
            kind.name()
        )));
    }
    let ys = &table.columns[1..];
    let (x_scale, y_label, y_scale, series) = match kind {
        PlotKind::EpsLogP => (
            "log",
            "eps_log_p",
            "linear",
            vec![Series {
                label: "eps_log_p".into(),
                columns: vec!["eps_log_p".into()],
            }],
        ),
        PlotKind::MomentScan => {
            // Columns come in (u, v) pairs, one pair per moment order.
            let series = ys
                .chunks(2)
                .map(|c| Series {
                    label: c[0].trim_start_matches("u_").to_string(),
                    columns: c.to_vec(),
                })
                .collect();
            ("log", "moment", "linear", series)
        }
        PlotKind::ErrorLadder => (
            "log",
            "magnitude",
            "log",
            ys.iter()
                .map(|c| Series {
                    label: c.clone(),
                    columns: vec![c.clone()],
                })
                .collect(),
        ),
    };
    let name = kind.name();
    let mut desc = String::new();
    let _ = writeln!(desc, "kind: {name}");
    let _ = writeln!(desc, "data: {name}.csv");
    let _ = writeln!(desc, "x: {}", table.columns[0]);
    let _ = writeln!(desc, "x_scale: {x_scale}");
    let _ = writeln!(desc, "y: {y_label}");
    let _ = writeln!(desc, "y_scale: {y_scale}");
    let _ = writeln!(desc, "series_count: {}", series.len());
    for s in &series {
        let _ = writeln!(desc, "series: {} columns={}", s.label, s.columns.join(","));
    }
    out.add(format!("{name}.csv"), table.to_csv());
    out.add(format!("{name}.plot.txt"), desc);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_log_p_descriptor() {
        let table = PlotTable {
            columns: vec!["epsilon".into(), "eps_log_p".into()],
            rows: vec![vec![0.5, -0.1], vec![0.2, f64::NEG_INFINITY]],
        };
        let mut out = Artifacts::new();
        emit_plot_data(&mut out, &table, PlotKind::EpsLogP).unwrap();
        assert_eq!(out.names().collect::<Vec<_>>(), ["eps_log_p.csv", "eps_log_p.plot.txt"]);
        let desc = String::from_utf8(out.get("eps_log_p.plot.txt").unwrap().to_vec()).unwrap();
        assert!(desc.contains("x: epsilon\nx_scale: log\ny: eps_log_p\n"));
        let csv = String::from_utf8(out.get("eps_log_p.csv").unwrap().to_vec()).unwrap();
        assert!(csv.ends_with("0.2,-inf\n"));
    }

    #[test]
    fn empty_table_rejected() {
        let table = PlotTable {
            columns: vec!["epsilon".into(), "eps_log_p".into()],
            rows: vec![],
        };
        let err = emit_plot_data(&mut Artifacts::new(), &table, PlotKind::EpsLogP).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn moment_descriptor_lists_one_series_per_order() {
        let table = PlotTable {
            columns: ["epsilon", "u_p2.0", "v_p2.0", "u_p4.0", "v_p4.0"]
                .map(String::from)
                .to_vec(),
            rows: vec![vec![1.0, 2.0, 2.0, 3.0, 3.0]],
        };
        let mut out = Artifacts::new();
        emit_plot_data(&mut out, &table, PlotKind::MomentScan).unwrap();
        let desc = String::from_utf8(out.get("moment_scan.plot.txt").unwrap().to_vec()).unwrap();
        assert_eq!(desc.lines().filter(|l| l.starts_with("series: ")).count(), 2);
        assert!(desc.contains("series_count: 2"));
    }
}
