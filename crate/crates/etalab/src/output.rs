//! Files written per run: `report.json`, `residuals.csv`, `branches.csv`,
//! `manifest.toml` and `timings.json`. Only the last two vary between
//! identical runs.

use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;

use etalab_core::verify::SuiteReport;

use crate::RunManifest;

pub const REPORT: &str = "report.json";
pub const RESIDUALS: &str = "residuals.csv";
pub const BRANCHES: &str = "branches.csv";
pub const MANIFEST: &str = "manifest.toml";
pub const TIMINGS: &str = "timings.json";

#[derive(Serialize)]
struct ResidualRow<'a> {
    check: &'a str,
    residual: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct Timing<'a> {
    suite: &'a str,
    seconds: f64,
}

pub fn write_report(dir: &Path, report: &SuiteReport) -> anyhow::Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join(REPORT), json).context("writing report.json")?;

    let mut w = csv::Writer::from_path(dir.join(RESIDUALS))?;
    for c in &report.checks {
        w.serialize(ResidualRow { check: &c.name, residual: c.residual, tolerance: c.tolerance, passed: c.passed })?;
    }
    w.flush()?;

    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(dir.join(BRANCHES))?;
    w.write_record(["family", "parameter", "branch", "value"])?;
    for b in &report.branches {
        w.serialize(b)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_run(dir: &Path, report: &SuiteReport, manifest: &RunManifest, timings: &[(String, Duration)]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_report(dir, report)?;
    fs::write(dir.join(MANIFEST), toml::to_string(manifest)?).context("writing manifest.toml")?;
    let t: Vec<Timing> = timings.iter().map(|(s, d)| Timing { suite: s, seconds: d.as_secs_f64() }).collect();
    fs::write(dir.join(TIMINGS), serde_json::to_string_pretty(&t)?).context("writing timings.json")?;
    Ok(())
}
