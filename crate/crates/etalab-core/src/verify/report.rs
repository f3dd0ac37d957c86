//! Structured results of a suite: checks against tolerances, named values,
//! refinement trends and the eigenvalue branches behind each spectral flow.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::operators::Provenance;
use crate::spectral::BranchSample;

/// bumped whenever a field of [`SuiteReport`] changes meaning or shape
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    /// passes when `residual < tolerance`; NaN never passes
    pub fn below(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, passed: residual < tolerance, note: String::new() }
    }

    /// an integer identity, passing only when the value is exactly zero
    pub fn exact(name: impl Into<String>, value: i64) -> Self {
        Self { name: name.into(), residual: value.unsigned_abs() as f64, tolerance: 0.0, passed: value == 0, note: String::new() }
    }

    /// a check that could not be evaluated
    pub fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self { name: name.into(), residual: f64::NAN, tolerance: 0.0, passed: false, note: note.into() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    /// the refinement parameter (cutoff, grid size)
    pub level: f64,
    pub residual: f64,
}

/// residual against refinement; a soft check, flagged and explained rather
/// than failed
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub quantity: String,
    pub rows: Vec<TrendRow>,
    pub non_increasing: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub rationale: String,
}

impl Trend {
    pub fn new(quantity: impl Into<String>, rows: Vec<TrendRow>) -> Self {
        let non_increasing = rows.windows(2).all(|w| w[1].residual <= w[0].residual);
        Self { quantity: quantity.into(), rows, non_increasing, rationale: String::new() }
    }

    pub fn with_rationale(mut self, rationale: impl Into<String>) -> Self {
        self.rationale = rationale.into();
        self
    }
}

/// sampled branches of one spectral flow, tagged by the family they belong to
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub family: String,
    pub parameter: f64,
    pub branch: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub values: Vec<NamedValue>,
    pub trends: Vec<Trend>,
    pub provenance: Vec<Provenance>,
    #[serde(skip)]
    pub branches: Vec<BranchRecord>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            seed,
            passed: true,
            checks: Vec::new(),
            values: Vec::new(),
            trends: Vec::new(),
            provenance: Vec::new(),
            branches: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64) {
        self.values.push(NamedValue { name: name.into(), value });
    }

    pub fn trend(&mut self, t: Trend) {
        self.trends.push(t);
    }

    pub fn branches(&mut self, family: &str, samples: &[BranchSample]) {
        self.branches.extend(samples.iter().map(|b| BranchRecord { family: family.into(), parameter: b.parameter, branch: b.branch, value: b.value }));
    }

    /// the checks that did not pass
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// merges several reports, e.g. the per-suite reports of one run
    pub fn merge(suite: &str, seed: u64, parts: impl IntoIterator<Item = SuiteReport>) -> Self {
        let mut out = Self::new(suite, seed);
        for p in parts {
            let prefix = p.suite.clone();
            for mut c in p.checks {
                c.name = alloc::format!("{prefix}/{}", c.name);
                out.check(c);
            }
            out.values.extend(p.values.into_iter().map(|v| NamedValue { name: alloc::format!("{prefix}/{}", v.name), value: v.value }));
            out.trends.extend(p.trends.into_iter().map(|mut t| {
                t.quantity = alloc::format!("{prefix}/{}", t.quantity);
                t
            }));
            out.provenance.extend(p.provenance);
            out.branches.extend(p.branches);
            out.passed &= p.passed;
        }
        out
    }
}
