// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV tables and the JSON sidecar.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{Failure, RunResult};

/// Sweeps are `(x, mean, stderr)`; maps put the column axis in the header
/// row and the row axis in the first column.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn sweep(x: &[f64], mean: &[f64], stderr: &[f64]) -> Self {
        let rows = x.iter().zip(mean).zip(stderr).map(|((&x, &m), &s)| vec![x, m, s]).collect();
        Self { header: vec!["x".into(), "mean".into(), "stderr".into()], rows }
    }

    pub fn matrix(corner: &str, cols: &[f64], rows: &[f64], values: &[Vec<f64>]) -> Self {
        let mut header = vec![corner.to_string()];
        header.extend(cols.iter().map(|c| c.to_string()));
        let rows = rows
            .iter()
            .zip(values)
            .map(|(&r, vals)| std::iter::once(r).chain(vals.iter().copied()).collect())
            .collect();
        Self { header, rows }
    }
}

pub struct Artifacts {
    /// One-line summary for stdout.
    pub summary: String,
    pub results: Value,
    /// `(suffix, table)`; the empty suffix is the main `PREFIX.csv`.
    pub tables: Vec<(&'static str, Table)>,
}

pub struct RunMeta<'a> {
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: Value,
}

fn with_suffix(prefix: &Path, suffix: &str, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    if !suffix.is_empty() {
        name.push(".");
        name.push(suffix);
    }
    name.push(".");
    name.push(ext);
    prefix.with_file_name(name)
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

pub fn write(prefix: &Path, meta: &RunMeta, art: &Artifacts) -> RunResult<()> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let mut files = Vec::new();
    for (suffix, table) in &art.tables {
        let path = with_suffix(prefix, suffix, "csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let fail = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
        w.write_record(&table.header).map_err(fail)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(fail)?;
        }
        w.flush().map_err(io(&path))?;
        files.push(path.file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    let sidecar = json!({
        "tool": "spinmem",
        "version": env!("CARGO_PKG_VERSION"),
        "commit": option_env!("SPINMEM_COMMIT").unwrap_or("unknown"),
        "command": meta.command,
        "seed": meta.seed,
        "config": meta.config,
        "files": files,
        "results": art.results,
    });
    let path = with_suffix(prefix, "", "json");
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(io(&path))?;
    Ok(())
}
