//! Sweep requests, CSV export and run manifests.
//!
//! A [`RunManifest`] embeds the full [`SweepRequest`], so replaying the
//! request reproduces every CSV row bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::search::{self, SearchConfig, SweepMode, SweepResult};
use crate::states::TmsvSpec;

pub const CSV_HEADER: &str =
    "axis1,axis2,nbar,bell_abs,violated,clamped,s_effective,a1_re,a1_im,a2_re,a2_im,b1_re,b1_im,b2_re,b2_im";

/// Everything needed to run a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub mode: SweepMode,
    pub xi: f64,
    /// `eta` grid in eta-s mode, `r` grid in thermal mode.
    pub axis1: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Empty in eta-s mode.
    pub nbar_list: Vec<f64>,
    pub config: SearchConfig,
}

impl SweepRequest {
    pub fn run(&self) -> Result<SweepResult> {
        let spec = TmsvSpec::new(self.xi)?;
        match self.mode {
            SweepMode::EtaS => search::sweep_eta_s(&spec, &self.axis1, &self.s_grid, &self.config),
            SweepMode::Thermal => {
                search::sweep_thermal(&spec, &self.axis1, &self.s_grid, &self.nbar_list, &self.config)
            }
        }
    }

    pub fn expected_cells(&self) -> usize {
        let layers = match self.mode {
            SweepMode::EtaS => 1,
            SweepMode::Thermal => self.nbar_list.len(),
        };
        layers * self.axis1.len() * self.s_grid.len()
    }
}

/// Round-trip exact: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(256 * (result.cells.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for cell in &result.cells {
        let r = &cell.outcome.report;
        let nbar = cell.nbar.map(fmt_f64).unwrap_or_default();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(cell.axis1),
            fmt_f64(cell.axis2),
            nbar,
            fmt_f64(r.bell_abs),
            r.violated,
            r.clamped,
            fmt_f64(r.s_effective),
        );
        for c in r.settings.coords() {
            out.push(',');
            out.push_str(&fmt_f64(c));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub request: SweepRequest,
    pub wall_time_s: f64,
    pub rows: usize,
    pub evaluations: usize,
    /// Optimizer starts stopped by the evaluation cap; their best point is kept.
    pub capped_starts: usize,
    pub checks: Vec<Check>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, request: &SweepRequest, result: &SweepResult) -> Self {
        let expected = request.expected_cells();
        let reports = || result.cells.iter().map(|c| &c.outcome.report);
        let check = |name: &str, passed: bool, detail: String| Check {
            name: name.into(),
            passed,
            detail,
        };
        let checks = vec![
            check(
                "cells_complete",
                result.cells.len() == expected,
                format!("{} of {expected}", result.cells.len()),
            ),
            check("finite_values", reports().all(|r| r.bell_value.is_finite()), String::new()),
            check(
                "violation_flags",
                reports().all(|r| r.violated == (r.bell_abs > 2.0)),
                "violated iff |B| > 2".into(),
            ),
        ];
        Self {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: request.config.seed,
            request: request.clone(),
            wall_time_s: result.wall_time_s,
            rows: result.cells.len(),
            evaluations: result.cells.iter().map(|c| c.outcome.evaluations).sum(),
            capped_starts: result.cells.iter().map(|c| c.outcome.capped_starts).sum(),
            checks,
        }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

/// `out.csv` -> `out.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Writes the CSV and its manifest; returns the manifest path.
pub fn write_sweep(csv: &Path, result: &SweepResult, manifest: &RunManifest) -> std::io::Result<PathBuf> {
    fs::write(csv, to_csv(result))?;
    let mpath = manifest_path(csv);
    let json = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    fs::write(&mpath, json + "\n")?;
    Ok(mpath)
}
