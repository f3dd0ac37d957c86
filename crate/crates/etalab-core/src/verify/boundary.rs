//! Interval operators over a boundary model: eta along the boundary
//! condition path, the reduced invariant and its circle counterpart.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::error::Result;
use crate::ktheory::BumpProfile;
use crate::linalg::{self, Mat};
use crate::models::ModelRng;
use crate::operators::{self, ModeBasis, ModelBoundary};
use crate::spectral::{self, EtaEstimate, EtaOptions, FlowOptions, FlowResult, SpectrumData};

/// a boundary model with a coefficient unitary and a cut-off profile
#[derive(Debug, Clone)]
pub struct BoundaryInstance {
    pub model: ModelBoundary,
    pub u: Mat,
    pub profile: BumpProfile,
}

impl BoundaryInstance {
    /// random `(A, γ)` of size `m` with coefficients `C^n` and `u = exp(iH)`
    pub fn random(seed: u64, m: usize, n: usize, unitary_scale: f64, profile: BumpProfile) -> Result<Self> {
        let mut rng = ModelRng::seeded(seed);
        let model = ModelBoundary::random(&mut rng, m, n, 1.0)?;
        let u = model.random_unitary(&mut rng, unitary_scale)?;
        Ok(Self { model, u, profile })
    }

    pub fn with_profile(&self, profile: BumpProfile) -> Self {
        Self { profile, ..self.clone() }
    }

    pub fn with_unitary(&self, u: Mat) -> Self {
        Self { u, ..self.clone() }
    }

    /// spectrum of `D^{ψ,u}(t)` with boundary condition `P_{bc_t}`
    pub fn interval_spectrum(&self, t: f64, bc_t: f64, basis: &ModeBasis) -> Result<SpectrumData> {
        let op = operators::interval_operator(&self.model, &self.u, &self.profile, t, bc_t, basis)?;
        SpectrumData::new(op.eigenvalues()?, Some(basis.resolved()), Some(op.provenance().clone()))
    }

    pub fn interval_eigenvalues(&self, t: f64, bc_t: f64, basis: &ModeBasis) -> Result<Vec<f64>> {
        spectral::sorted_eigenvalues(&operators::interval_operator(&self.model, &self.u, &self.profile, t, bc_t, basis)?)
    }

    /// spectrum of `e_u D e_u` on the circle with Fourier cutoff `k`
    pub fn circle_spectrum(&self, k: usize) -> Result<SpectrumData> {
        let op = operators::build_cup_frame_circle(&self.model, &self.u, &self.profile, k)?;
        let cutoff = core::f64::consts::PI * k as f64;
        SpectrumData::new(op.eigenvalues()?, Some(cutoff), Some(op.provenance().clone()))
    }
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PathEta {
    pub t: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_error: Vec<f64>,
    /// `η(t) − 2 SF(0 → t)`, the continuous part
    pub corrected: Vec<f64>,
    pub sf: i64,
    pub deviation: f64,
    pub corrected_deviation: f64,
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// eta of `D^{ψ,u}` along the boundary conditions `P_t`, `t ∈ [0, π/4]`
pub fn eta_along_boundary_path(inst: &BoundaryInstance, points: usize, basis: &ModeBasis, flow: &FlowOptions) -> Result<(PathEta, FlowResult)> {
    let t = uniform_grid(0.0, FRAC_PI_4, points);
    let specs = t.iter().map(|&bt| inst.interval_spectrum(1.0, bt, basis)).collect::<Result<Vec<_>>>()?;
    let etas: Vec<EtaEstimate> = specs.iter().map(|s| spectral::eta(s, &EtaOptions::default())).collect();
    let nodes: Vec<(f64, Vec<f64>)> = t.iter().zip(&specs).map(|(&x, s)| (x, s.eigenvalues().to_vec())).collect();
    let fr = spectral::spectral_flow_from_nodes(&nodes, |bt| inst.interval_eigenvalues(1.0, bt, basis), flow)?;
    // running flow from t = 0 to each node, for the jump correction
    let corrected: Vec<f64> = t
        .iter()
        .zip(&etas)
        .map(|(&x, e)| {
            let sf: i64 = fr.crossings.iter().filter(|c| c.parameter <= x).map(|c| c.direction as i64).sum();
            e.value + e.kernel_dim as f64 - 2.0 * sf as f64
        })
        .collect();
    let eta: Vec<f64> = etas.iter().map(|e| e.value).collect();
    let out = PathEta {
        deviation: spread(&eta),
        corrected_deviation: spread(&corrected),
        eta_error: etas.iter().map(|e| e.error).collect(),
        t,
        eta,
        corrected,
        sf: fr.sf,
    };
    Ok((out, fr))
}

/// the reduced invariant `ξ(D^{ψ,u}; P_0) − SF(D^{ψ,u}(t); P_0)_{t∈[0,1]}`
#[derive(Debug, Clone, Serialize)]
pub struct ReducedInvariant {
    pub xi_p0: f64,
    pub eta_p0: EtaEstimate,
    pub sf_t: i64,
    pub value: f64,
}

pub fn reduced_invariant(inst: &BoundaryInstance, t_points: usize, basis: &ModeBasis, flow: &FlowOptions) -> Result<(ReducedInvariant, FlowResult)> {
    let spec = inst.interval_spectrum(1.0, 0.0, basis)?;
    let eta = spectral::eta(&spec, &EtaOptions::default());
    let fr = spectral::spectral_flow(|t| inst.interval_eigenvalues(t, 0.0, basis), &uniform_grid(0.0, 1.0, t_points), flow)?;
    let out = ReducedInvariant { xi_p0: eta.xi, sf_t: fr.sf, value: eta.xi - fr.sf as f64, eta_p0: eta };
    Ok((out, fr))
}

/// both sides of the equality of the reduced invariant with the circle
/// invariant `ξ(e_u D e_u)`
#[derive(Debug, Clone, Serialize)]
pub struct CircleComparison {
    pub reduced: ReducedInvariant,
    pub xi_circle: f64,
    pub eta_circle: EtaEstimate,
    /// `SF(D^{ψ,u}; P_t)` over `t ∈ [0, π/4]`
    pub sf_path: i64,
    /// distance of `ξ̄ − ξ(e_u D e_u)` to the nearest integer
    pub mod1_residual: f64,
    /// `ξ̄ − (ξ(e_u D e_u) − SF_{P_t} − SF_t)`, an integer in exact arithmetic
    pub full_identity: f64,
}

pub fn circle_comparison(inst: &BoundaryInstance, circle_k: usize, t_points: usize, basis: &ModeBasis, flow: &FlowOptions) -> Result<CircleComparison> {
    let (reduced, _) = reduced_invariant(inst, t_points, basis, flow)?;
    let eta_circle = spectral::eta(&inst.circle_spectrum(circle_k)?, &EtaOptions::default());
    let path = spectral::spectral_flow(|bt| inst.interval_eigenvalues(1.0, bt, basis), &uniform_grid(0.0, FRAC_PI_4, t_points), flow)?;
    let full_identity = reduced.value - (eta_circle.xi - path.sf as f64 - reduced.sf_t as f64);
    Ok(CircleComparison {
        mod1_residual: spectral::mod1_distance(reduced.value - eta_circle.xi),
        xi_circle: eta_circle.xi,
        sf_path: path.sf,
        full_identity,
        reduced,
        eta_circle,
    })
}

/// `u_s = u₀ exp(isΘ)` for `s ∈ [0, 1]`
#[derive(Debug, Clone)]
pub struct CoefficientPath {
    pub start: Mat,
    pub generator: Mat,
}

impl CoefficientPath {
    /// the geodesic from `u` to `v`
    pub fn geodesic(u: &Mat, v: &Mat) -> Result<Self> {
        Ok(Self { start: u.clone(), generator: operators::unitary_log(&(u.adjoint() * v))? })
    }

    /// `u exp(2πis P)`, a loop when `P` is a projection
    pub fn winding(u: &Mat, p: &Mat) -> Self {
        let generator = Mat::from_fn(p.nrows(), p.ncols(), |i, j| p[(i, j)] * (2.0 * core::f64::consts::PI));
        Self { start: u.clone(), generator }
    }

    pub fn at(&self, s: f64) -> Result<Mat> {
        let h = Mat::from_fn(self.generator.nrows(), self.generator.ncols(), |i, j| self.generator[(i, j)] * s);
        Ok(&self.start * &linalg::exp_i(&h)?)
    }
}

/// spectral flows along the edges of a square, each oriented by increasing
/// parameter; the loop flow is `bottom + right − top − left`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareEdges {
    pub bottom: i64,
    pub right: i64,
    pub top: i64,
    pub left: i64,
}

impl SquareEdges {
    pub fn loop_sf(&self) -> i64 {
        self.bottom + self.right - self.top - self.left
    }

    pub fn as_report(&self) -> spectral::SquareReport {
        spectral::SquareReport { bottom: self.bottom, right: self.right, top: -self.top, left: -self.left, loop_sf: self.loop_sf() }
    }
}

fn edge<F>(f: F, lo: f64, hi: f64, points: usize, flow: &FlowOptions) -> Result<i64>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    Ok(spectral::spectral_flow(f, &uniform_grid(lo, hi, points), flow)?.sf)
}

/// `(D^{ψ,u_s}; P_t^{u_s})` over `s ∈ [0,1]`, `t ∈ [0, π/4]`; the top edge is
/// `e_{u_s} D e_{u_s}` on the circle
pub fn boundary_condition_square(
    inst: &BoundaryInstance,
    path: &CoefficientPath,
    points: usize,
    basis: &ModeBasis,
    circle_k: usize,
    flow: &FlowOptions,
) -> Result<SquareEdges> {
    let at = |s: f64| -> Result<BoundaryInstance> { Ok(inst.with_unitary(path.at(s)?)) };
    let (first, last) = (at(0.0)?, at(1.0)?);
    let bottom = edge(|s| at(s)?.interval_eigenvalues(1.0, 0.0, basis), 0.0, 1.0, points, flow)?;
    let top = edge(|s| Ok(sorted(at(s)?.circle_spectrum(circle_k)?.eigenvalues().to_vec())), 0.0, 1.0, points, flow)?;
    let left = edge(|t| first.interval_eigenvalues(1.0, t, basis), 0.0, FRAC_PI_4, points, flow)?;
    let right = edge(|t| last.interval_eigenvalues(1.0, t, basis), 0.0, FRAC_PI_4, points, flow)?;
    Ok(SquareEdges { bottom, right, top, left })
}

/// `(D^{ψ,u_s}(t); P_0^{u_s})` over `s ∈ [0,1]`, `t ∈ [0,1]`
pub fn deformation_square(inst: &BoundaryInstance, path: &CoefficientPath, points: usize, basis: &ModeBasis, flow: &FlowOptions) -> Result<SquareEdges> {
    let at = |s: f64| -> Result<BoundaryInstance> { Ok(inst.with_unitary(path.at(s)?)) };
    let (first, last) = (at(0.0)?, at(1.0)?);
    let bottom = edge(|s| at(s)?.interval_eigenvalues(0.0, 0.0, basis), 0.0, 1.0, points, flow)?;
    let top = edge(|s| at(s)?.interval_eigenvalues(1.0, 0.0, basis), 0.0, 1.0, points, flow)?;
    let left = edge(|t| first.interval_eigenvalues(t, 0.0, basis), 0.0, 1.0, points, flow)?;
    let right = edge(|t| last.interval_eigenvalues(t, 0.0, basis), 0.0, 1.0, points, flow)?;
    Ok(SquareEdges { bottom, right, top, left })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
