//! Configuration of the suites. Every field has a default, so a config file
//! only needs the values it changes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// multiplies every tolerance
    pub tolerance_scale: f64,
    pub forms: FormsConfig,
    pub eta_oracle: EtaOracleConfig,
    pub theorem1: Theorem1Config,
    pub prop_path: PropPathConfig,
    pub eta_equivalence: EtaEquivalenceConfig,
    pub sf_squares: SfSquaresConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance_scale: 1.0,
            forms: FormsConfig::default(),
            eta_oracle: EtaOracleConfig::default(),
            theorem1: Theorem1Config::default(),
            prop_path: PropPathConfig::default(),
            eta_equivalence: EtaEquivalenceConfig::default(),
            sf_squares: SfSquaresConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormsConfig {
    pub lemma_n_theta: usize,
    pub eps_flat: f64,
    pub lemma_tol: f64,
    /// seeded unitaries for the cup-product contract, on each of S¹ and T²
    pub cup_unitaries: usize,
    pub cup_tol: f64,
    /// circle grid of the cup products on `S¹ × Y`
    pub n_theta: usize,
    /// grid of `Y` per axis
    pub n_y: usize,
    pub windings: Vec<i64>,
    pub torus_unitaries: usize,
    pub chern_tol: f64,
    pub paths: usize,
    pub n_s: usize,
    pub tch_tol: f64,
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self {
            lemma_n_theta: 512,
            eps_flat: 0.05,
            lemma_tol: 1e-10,
            cup_unitaries: 20,
            cup_tol: 1e-10,
            n_theta: 128,
            n_y: 48,
            windings: vec![-2, -1, 0, 1, 2],
            torus_unitaries: 5,
            chern_tol: 1e-8,
            paths: 3,
            n_s: 33,
            tch_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaOracleConfig {
    pub b: Vec<f64>,
    pub cutoff: usize,
    pub tol: f64,
}

impl Default for EtaOracleConfig {
    fn default() -> Self {
        Self { b: vec![0.1, 0.25, 0.4, 0.6, 0.9], cutoff: 2000, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Instance {
    #[default]
    All,
    Circle,
    Torus,
}

impl Instance {
    pub fn circle(self) -> bool {
        matches!(self, Self::All | Self::Circle)
    }

    pub fn torus(self) -> bool {
        matches!(self, Self::All | Self::Torus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Config {
    pub instance: Instance,
    pub circle: CircleConfig,
    pub torus: TorusConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    pub paths: usize,
    pub degree: usize,
    /// Fourier cutoffs, coarse to fine; the last one is checked
    pub cutoffs: Vec<usize>,
    pub n_theta: usize,
    pub n_s: usize,
    pub flow_points: usize,
    pub tol: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        Self { paths: 3, degree: 2, cutoffs: vec![32, 64], n_theta: 128, n_s: 33, flow_points: 9, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusConfig {
    pub cutoffs: Vec<usize>,
    /// collocation nodes along the circle factor
    pub m_theta: usize,
    pub n_xy: usize,
    pub n_s: usize,
    pub mass: f64,
    pub kappa: f64,
    pub profile_n_theta: usize,
    pub eps_flat: f64,
    pub tol: f64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self { cutoffs: vec![2, 3], m_theta: 19, n_xy: 32, n_s: 33, mass: 1.0, kappa: 0.5, profile_n_theta: 64, eps_flat: 0.05, tol: 5e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropPathConfig {
    /// `(m, n)` of each seeded boundary model
    pub models: Vec<[usize; 2]>,
    pub t_points: usize,
    pub mode_cutoff: usize,
    pub unitary_scale: f64,
    pub eps_flat: f64,
    pub tol: f64,
    pub proof_tol: f64,
}

impl Default for PropPathConfig {
    fn default() -> Self {
        Self {
            models: vec![[2, 1], [4, 1], [2, 2], [4, 2], [2, 1]],
            t_points: 8,
            mode_cutoff: 40,
            unitary_scale: 1.0,
            eps_flat: 0.05,
            tol: 5e-3,
            proof_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaEquivalenceConfig {
    pub models: Vec<[usize; 2]>,
    pub unitary_scale: f64,
    pub mode_cutoffs: Vec<usize>,
    pub circle_cutoff: usize,
    pub t_points: usize,
    pub eps_flat: f64,
    /// flat width of the second cut-off profile
    pub alt_eps_flat: f64,
    pub mod1_tol: f64,
    pub integer_tol: f64,
    pub psi_tol: f64,
    pub conjugation: ConjugationConfig,
}

impl Default for EtaEquivalenceConfig {
    fn default() -> Self {
        Self {
            models: vec![[2, 1], [4, 1], [2, 2], [4, 2], [2, 1]],
            unitary_scale: 3.0,
            mode_cutoffs: vec![20, 40],
            circle_cutoff: 64,
            t_points: 6,
            eps_flat: 0.05,
            alt_eps_flat: 0.1,
            mod1_tol: 1e-2,
            integer_tol: 1e-2,
            psi_tol: 2e-3,
            conjugation: ConjugationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjugationConfig {
    /// circle grid sizes `N_θ`, coarse to fine (odd grids of `N_θ + 1` nodes)
    pub n_theta: Vec<usize>,
    pub eps_flat: f64,
    pub profile_n_theta: usize,
    pub low_modes: usize,
    pub tol: f64,
    /// required decrease of the residual from the coarsest to the finest grid
    pub min_ratio: f64,
}

impl Default for ConjugationConfig {
    fn default() -> Self {
        Self { n_theta: vec![64, 256], eps_flat: 0.02, profile_n_theta: 256, low_modes: 8, tol: 1e-6, min_ratio: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfSquaresConfig {
    pub squares: usize,
    pub m: usize,
    pub n: usize,
    pub points: usize,
    pub mode_cutoff: usize,
    pub circle_cutoff: usize,
    pub unitary_scale: f64,
    pub eps_flat: f64,
}

impl Default for SfSquaresConfig {
    fn default() -> Self {
        Self { squares: 3, m: 2, n: 1, points: 9, mode_cutoff: 20, circle_cutoff: 32, unitary_scale: 3.0, eps_flat: 0.05 }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be at least {min}, got {v}")))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::InvalidParameter(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

fn models(name: &str, v: &[[usize; 2]]) -> Result<()> {
    nonempty(name, v)?;
    match v.iter().find(|[m, n]| *m < 2 || m % 2 == 1 || *n < 1) {
        Some([m, n]) => Err(Error::InvalidParameter(format!("{name}: model ({m}, {n}) needs even m ≥ 2 and n ≥ 1"))),
        None => Ok(()),
    }
}

impl SuiteConfig {
    /// rejects configurations the suites cannot run; the grids themselves
    /// are checked again by the builders
    pub fn validate(&self) -> Result<()> {
        positive("tolerance_scale", self.tolerance_scale)?;
        let f = &self.forms;
        for (n, v) in [("forms.lemma_tol", f.lemma_tol), ("forms.cup_tol", f.cup_tol), ("forms.chern_tol", f.chern_tol), ("forms.tch_tol", f.tch_tol), ("forms.eps_flat", f.eps_flat)] {
            positive(n, v)?;
        }
        at_least("forms.n_s", f.n_s, 3)?;
        if f.n_s.is_multiple_of(2) {
            return Err(Error::InvalidParameter("forms.n_s must be odd (Simpson rule)".into()));
        }
        let e = &self.eta_oracle;
        positive("eta_oracle.tol", e.tol)?;
        at_least("eta_oracle.cutoff", e.cutoff, 16)?;
        nonempty("eta_oracle.b", &e.b)?;
        let c = &self.theorem1.circle;
        positive("theorem1.circle.tol", c.tol)?;
        nonempty("theorem1.circle.cutoffs", &c.cutoffs)?;
        at_least("theorem1.circle.flow_points", c.flow_points, 2)?;
        let t = &self.theorem1.torus;
        positive("theorem1.torus.tol", t.tol)?;
        nonempty("theorem1.torus.cutoffs", &t.cutoffs)?;
        if t.m_theta.is_multiple_of(2) {
            return Err(Error::InvalidParameter("theorem1.torus.m_theta must be odd".into()));
        }
        let p = &self.prop_path;
        models("prop_path.models", &p.models)?;
        positive("prop_path.tol", p.tol)?;
        positive("prop_path.proof_tol", p.proof_tol)?;
        at_least("prop_path.t_points", p.t_points, 2)?;
        at_least("prop_path.mode_cutoff", p.mode_cutoff, 4)?;
        let q = &self.eta_equivalence;
        models("eta_equivalence.models", &q.models)?;
        nonempty("eta_equivalence.mode_cutoffs", &q.mode_cutoffs)?;
        for (n, v) in [("mod1_tol", q.mod1_tol), ("integer_tol", q.integer_tol), ("psi_tol", q.psi_tol), ("conjugation.tol", q.conjugation.tol), ("conjugation.min_ratio", q.conjugation.min_ratio)] {
            positive(&format!("eta_equivalence.{n}"), v)?;
        }
        at_least("eta_equivalence.conjugation.n_theta", q.conjugation.n_theta.len(), 2)?;
        let s = &self.sf_squares;
        models("sf_squares", &[[s.m, s.n]])?;
        at_least("sf_squares.points", s.points, 2)?;
        Ok(())
    }

    /// `tol × tolerance_scale`
    pub fn tol(&self, tol: f64) -> f64 {
        tol * self.tolerance_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SuiteConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let c = SuiteConfig { tolerance_scale: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        let mut c = SuiteConfig::default();
        c.prop_path.models.push([3, 1]);
        assert!(c.validate().is_err());
        let mut c = SuiteConfig::default();
        c.forms.n_s = 32;
        assert!(c.validate().is_err());
    }
}
