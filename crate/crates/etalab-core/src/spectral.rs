//! Spectra, regularized eta invariants, spectral flow along families and
//! around squares, and the ξ-difference bookkeeping.

use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::SolveLstsq;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{DiscreteOperator, Provenance};

/// kernel tolerance relative to the largest eigenvalue modulus
pub const KERNEL_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumData {
    eigenvalues: Vec<f64>,
    kernel_dim: usize,
    eps_ker: f64,
    cutoff: f64,
    provenance: Option<Provenance>,
}

impl SpectrumData {
    /// sorts `values`; the cutoff defaults to half the spectral radius, the
    /// range where discretized Dirac spectra are trustworthy
    pub fn new(mut values: Vec<f64>, cutoff: Option<f64>, provenance: Option<Provenance>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver);
        }
        values.sort_by(f64::total_cmp);
        let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let eps_ker = KERNEL_REL_TOL * radius.max(f64::MIN_POSITIVE);
        let kernel_dim = values.iter().filter(|v| v.abs() < eps_ker).count();
        let cutoff = cutoff.unwrap_or(0.5 * radius);
        Ok(Self { eigenvalues: values, kernel_dim, eps_ker, cutoff, provenance })
    }

    pub fn with_eps_ker(mut self, eps_ker: f64) -> Self {
        self.eps_ker = eps_ker;
        self.kernel_dim = self.eigenvalues.iter().filter(|v| v.abs() < eps_ker).count();
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn eps_ker(&self) -> f64 {
        self.eps_ker
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// the same spectrum multiplied by `c > 0`, cutoff included
    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.eigenvalues.iter_mut().for_each(|v| *v *= c);
        s.eps_ker *= c;
        s.cutoff *= c;
        s
    }
}

/// dense spectrum of a discrete operator
pub fn eigenvalues(op: &DiscreteOperator) -> Result<SpectrumData> {
    SpectrumData::new(op.eigenvalues()?, None, Some(op.provenance().clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailModel {
    None,
    /// eigenvalue densities of each sign fitted as `a + bλ` on `[Λ/2, Λ]`
    Weyl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaOptions {
    pub points: usize,
    /// the window `√τ ∈ [lo/Λ, hi/Λ]`
    pub lo: f64,
    pub hi: f64,
    pub degree: usize,
    pub tail: TailModel,
}

impl Default for EtaOptions {
    fn default() -> Self {
        Self { points: 12, lo: 5.0, hi: 20.0, degree: 3, tail: TailModel::Weyl }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaEstimate {
    pub value: f64,
    pub sqrt_tau: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub error: f64,
    pub kernel_dim: usize,
    pub xi: f64,
}

impl EtaEstimate {
    pub fn converged(&self) -> bool {
        self.error.is_finite()
    }
}

fn erfc_tail_integrals(y: f64) -> (f64, f64) {
    // ∫_y^∞ erfc(z) dz and ∫_y^∞ z erfc(z) dz
    let (e, c) = (libm::exp(-y * y), libm::erfc(y));
    let sqrt_pi = libm::sqrt(core::f64::consts::PI);
    (e / sqrt_pi - y * c, -0.5 * y * y * c + 0.5 * y * e / sqrt_pi + 0.25 * c)
}

fn linear_density(values: impl Iterator<Item = f64>, lo: f64, hi: f64) -> (f64, f64) {
    // least squares of a + bλ against a histogram with 8 bins
    const BINS: usize = 8;
    let w = (hi - lo) / BINS as f64;
    let mut counts = [0.0; BINS];
    for v in values.filter(|&v| v > lo && v <= hi) {
        let k = (((v - lo) / w) as usize).min(BINS - 1);
        counts[k] += 1.0 / w;
    }
    let xs: Vec<f64> = (0..BINS).map(|k| lo + (k as f64 + 0.5) * w).collect();
    let mx = xs.iter().sum::<f64>() / BINS as f64;
    let my = counts.iter().sum::<f64>() / BINS as f64;
    let sxy: f64 = xs.iter().zip(&counts).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn polyfit_intercept(x: &[f64], y: &[f64], degree: usize) -> (f64, f64) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let v = faer::Mat::<f64>::from_fn(x.len(), degree + 1, |i, j| libm::pow(x[i] / scale, j as f64));
    let rhs = faer::Mat::<f64>::from_fn(x.len(), 1, |i, _| y[i]);
    let coef = v.qr().solve_lstsq(&rhs);
    let fit = &v * &coef;
    let resid = (0..x.len()).map(|i| (fit[(i, 0)] - y[i]).abs()).fold(0.0, f64::max);
    (coef[(0, 0)], resid)
}

/// regularized partial sum `Σ_{0<|λ|≤Λ} sign(λ) erfc(√τ|λ|)` plus tail
pub fn eta_partial_sum(spec: &SpectrumData, sqrt_tau: f64, tail: TailModel) -> f64 {
    let lam = spec.cutoff;
    // sum each sign from small |λ| up, so symmetric spectra cancel exactly
    let mut pos: Vec<f64> = spec.eigenvalues.iter().copied().filter(|&v| v >= spec.eps_ker && v <= lam).collect();
    let mut neg: Vec<f64> = spec.eigenvalues.iter().filter(|&&v| v <= -spec.eps_ker && v >= -lam).map(|v| -v).collect();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let sum = |v: &[f64]| v.iter().map(|&l| libm::erfc(sqrt_tau * l)).sum::<f64>();
    let mut eta = sum(&pos) - sum(&neg);
    if tail == TailModel::Weyl {
        let (ap, bp) = linear_density(pos.iter().copied(), 0.5 * lam, lam);
        let (an, bn) = linear_density(neg.iter().copied(), 0.5 * lam, lam);
        let (i0, i1) = erfc_tail_integrals(sqrt_tau * lam);
        eta += (ap - an) * i0 / sqrt_tau + (bp - bn) * i1 / (sqrt_tau * sqrt_tau);
    }
    eta
}

/// extrapolates the regularized eta sum to `τ → 0`
pub fn eta(spec: &SpectrumData, opts: &EtaOptions) -> EtaEstimate {
    let lam = spec.cutoff;
    let below = spec.eigenvalues.iter().filter(|v| v.abs() >= spec.eps_ker && v.abs() <= lam).count();
    let n = opts.points.max(opts.degree + 3);
    let ratio = opts.hi / opts.lo;
    let sqrt_tau: Vec<f64> = (0..n).map(|i| opts.lo / lam * libm::pow(ratio, i as f64 / (n - 1) as f64)).collect();
    let partial_sums: Vec<f64> = sqrt_tau.iter().map(|&t| eta_partial_sum(spec, t, opts.tail)).collect();
    let kernel_dim = spec.kernel_dim;
    if below < 4 || !lam.is_finite() || lam <= 0.0 {
        let value = partial_sums.first().copied().unwrap_or(0.0);
        return EtaEstimate { value, sqrt_tau, partial_sums, error: f64::INFINITY, kernel_dim, xi: 0.5 * (value + kernel_dim as f64) };
    }
    let (value, resid) = polyfit_intercept(&sqrt_tau, &partial_sums, opts.degree);
    let spread = [opts.degree.saturating_sub(1).max(1), opts.degree + 1]
        .into_iter()
        .map(|j| (polyfit_intercept(&sqrt_tau, &partial_sums, j).0 - value).abs())
        .fold(0.0, f64::max);
    let error = spread.max(resid);
    EtaEstimate { value, sqrt_tau, partial_sums, error, kernel_dim, xi: 0.5 * (value + kernel_dim as f64) }
}

/// eta with default options
pub fn eta_default(spec: &SpectrumData) -> EtaEstimate {
    eta(spec, &EtaOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub parameter: f64,
    /// `+1` when a branch moves from `< 0` to `≥ 0` with the parameter
    pub direction: i32,
    /// index of the branch in the sorted spectrum
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSample {
    pub parameter: f64,
    pub branch: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult {
    pub sf: i64,
    pub crossings: Vec<Crossing>,
    pub depth: usize,
    pub branches: Vec<BranchSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowOptions {
    /// absolute kernel tolerance; eigenvalues in `(−ε, ε)` count as nonnegative
    pub eps_ker: f64,
    pub max_depth: usize,
    /// crossings are localized to windows of this width
    pub resolution: f64,
    /// eigenvalues on each side of zero kept for the branch dump
    pub window: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { eps_ker: 1e-10, max_depth: 40, resolution: 1e-8, window: 4 }
    }
}

fn n_neg(values: &[f64], eps: f64) -> usize {
    values.iter().filter(|&&v| v < -eps).count()
}

/// Spectral flow of a family whose sorted spectra are known at `nodes`
/// (increasing parameters); `refine` supplies spectra at new parameters for
/// bisection. Branches are matched by sorted order, which is the
/// minimal-displacement matching for real spectra of fixed size.
pub fn spectral_flow_from_nodes<F>(nodes: &[(f64, Vec<f64>)], mut refine: F, opts: &FlowOptions) -> Result<FlowResult>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if nodes.len() < 2 {
        return Err(Error::InvalidParameter("spectral flow needs at least two parameter nodes".into()));
    }
    let dim = nodes[0].1.len();
    if nodes.iter().any(|(_, v)| v.len() != dim) {
        return Err(Error::DimMismatch("family changes dimension along the path".into()));
    }
    let mut crossings = Vec::new();
    let mut branches = Vec::new();
    let mut depth = 0;
    let dump = |s: f64, v: &[f64], out: &mut Vec<BranchSample>| {
        let z = n_neg(v, opts.eps_ker);
        let lo = z.saturating_sub(opts.window);
        let hi = (z + opts.window).min(v.len());
        out.extend((lo..hi).map(|b| BranchSample { parameter: s, branch: b, value: v[b] }));
    };
    for (s, v) in nodes {
        dump(*s, v, &mut branches);
    }
    for w in nodes.windows(2) {
        let ((a, va), (b, vb)) = (&w[0], &w[1]);
        let (na, nb) = (n_neg(va, opts.eps_ker), n_neg(vb, opts.eps_ker));
        if na == nb {
            continue;
        }
        // bisect, keeping a stack of windows with a count change
        let mut stack = vec![(*a, na, *b, nb, 0usize)];
        while let Some((lo, nlo, hi, nhi, d)) = stack.pop() {
            depth = depth.max(d);
            if hi - lo <= opts.resolution || d >= opts.max_depth {
                if hi - lo > opts.resolution && nlo.abs_diff(nhi) > 1 {
                    return Err(Error::AmbiguousBranches { lo, hi });
                }
                let mid = 0.5 * (lo + hi);
                let (dir, from, to) = if nlo > nhi { (1, nhi, nlo) } else { (-1, nlo, nhi) };
                crossings.extend((from..to).map(|branch| Crossing { parameter: mid, direction: dir, branch }));
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let vm = refine(mid)?;
            if vm.len() != dim {
                return Err(Error::DimMismatch("family changes dimension along the path".into()));
            }
            dump(mid, &vm, &mut branches);
            let nm = n_neg(&vm, opts.eps_ker);
            // push the right half first so crossings come out in parameter order
            if nm != nhi {
                stack.push((mid, nm, hi, nhi, d + 1));
            }
            if nlo != nm {
                stack.push((lo, nlo, mid, nm, d + 1));
            }
        }
    }
    let sf = n_neg(&nodes[0].1, opts.eps_ker) as i64 - n_neg(&nodes[nodes.len() - 1].1, opts.eps_ker) as i64;
    debug_assert_eq!(sf, crossings.iter().map(|c| c.direction as i64).sum::<i64>());
    branches.sort_by(|x, y| x.parameter.total_cmp(&y.parameter).then(x.branch.cmp(&y.branch)));
    Ok(FlowResult { sf, crossings, depth, branches })
}

/// spectral flow of `builder` (returning sorted eigenvalues) over `grid`
pub fn spectral_flow<F>(mut builder: F, grid: &[f64], opts: &FlowOptions) -> Result<FlowResult>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let nodes = grid.iter().map(|&s| Ok((s, builder(s)?))).collect::<Result<Vec<_>>>()?;
    spectral_flow_from_nodes(&nodes, builder, opts)
}

/// sorted eigenvalues of an operator, for use as a flow builder
pub fn sorted_eigenvalues(op: &DiscreteOperator) -> Result<Vec<f64>> {
    let mut v = op.eigenvalues()?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// spectral flow of a continuous family of operators on one fixed
/// finite-dimensional space, from its end spectra alone: every branch is
/// continuous, so the flow is the decrease of the negative count
pub fn spectral_flow_endpoints(start: &[f64], end: &[f64], eps: f64) -> Result<i64> {
    if start.len() != end.len() {
        return Err(Error::DimMismatch(alloc::format!("end spectra of sizes {} and {}", start.len(), end.len())));
    }
    Ok(n_neg(start, eps) as i64 - n_neg(end, eps) as i64)
}

/// spectral flows along the four edges of `[0,1]²`, taken counterclockwise
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareReport {
    /// `y = 0`, `x: 0 → 1`
    pub bottom: i64,
    /// `x = 1`, `y: 0 → 1`
    pub right: i64,
    /// `y = 1`, `x: 1 → 0`
    pub top: i64,
    /// `x = 0`, `y: 1 → 0`
    pub left: i64,
    pub loop_sf: i64,
}

impl SquareReport {
    /// flows with every edge oriented by increasing parameter
    pub fn forward(&self) -> (i64, i64, i64, i64) {
        (self.bottom, self.right, -self.top, -self.left)
    }
}

pub fn sf_square<F>(mut builder: F, grid: &[f64], opts: &FlowOptions) -> Result<SquareReport>
where
    F: FnMut(f64, f64) -> Result<Vec<f64>>,
{
    let rev: Vec<f64> = grid.iter().rev().copied().collect();
    let flip = |g: &[f64]| -> Vec<f64> { g.iter().map(|v| 1.0 - v).collect() };
    let bottom = spectral_flow(|x| builder(x, 0.0), grid, opts)?.sf;
    let right = spectral_flow(|y| builder(1.0, y), grid, opts)?.sf;
    // reversed edges are parametrized by 1 − x so the parameter increases
    let top = spectral_flow(|r| builder(1.0 - r, 1.0), &flip(&rev), opts)?.sf;
    let left = spectral_flow(|r| builder(0.0, 1.0 - r), &flip(&rev), opts)?.sf;
    Ok(SquareReport { bottom, right, top, left, loop_sf: bottom + right + top + left })
}

/// `ξ₁ − ξ₀ − SF` against an independently computed right-hand side
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiDifferenceReport {
    pub xi0: f64,
    pub xi1: f64,
    pub sf: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub mod1: f64,
    pub eta_error: f64,
}

/// distance to the nearest integer
pub fn mod1_distance(x: f64) -> f64 {
    (x - libm::round(x)).abs()
}

pub fn xi_difference_identity(start: &EtaEstimate, end: &EtaEstimate, flow: &FlowResult, rhs: f64) -> Result<XiDifferenceReport> {
    let eta_error = start.error.max(end.error);
    if !eta_error.is_finite() {
        return Err(Error::InvalidParameter("eta estimate did not converge".into()));
    }
    let lhs = end.xi - start.xi - flow.sf as f64;
    Ok(XiDifferenceReport {
        xi0: start.xi,
        xi1: end.xi,
        sf: flow.sf,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        mod1: mod1_distance(lhs - rhs),
        eta_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_shifted_circle, shifted_circle_spectrum};

    fn spec(v: Vec<f64>) -> SpectrumData {
        SpectrumData::new(v, None, None).unwrap()
    }

    #[test]
    fn diagonal_spectrum() {
        let op = DiscreteOperator::new(
            crate::linalg::Mat::from_fn(2, 2, |i, j| if i != j { crate::linalg::ZERO } else if i == 0 { crate::linalg::ONE } else { -crate::linalg::ONE }),
            Provenance::new("diag", &[], "C^2"),
        )
        .unwrap();
        let s = eigenvalues(&op).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 1.0]);
        assert_eq!(s.kernel_dim(), 0);
    }

    #[test]
    fn shifted_circle_eigenvalues() {
        let s = eigenvalues(&build_shifted_circle(0.25, 32).unwrap()).unwrap();
        let want = shifted_circle_spectrum(0.25, 32);
        let err = s.eigenvalues().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn symmetric_spectrum_has_zero_eta() {
        let v: Vec<f64> = (1..400).flat_map(|k| [k as f64 * 0.37 + 0.1, -(k as f64 * 0.37 + 0.1)]).collect();
        let e = eta_default(&spec(v));
        assert_eq!(e.value, 0.0);
        assert!(e.partial_sums.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn shifted_circle_eta_oracle() {
        for b in [0.1, 0.25, 0.4, 0.6, 0.9] {
            let e = eta_default(&spec(shifted_circle_spectrum(b, 2000)));
            assert!((e.value - (1.0 - 2.0 * b)).abs() < 1e-3, "b = {b}: {e:?}");
            assert!(e.error < 1e-3);
        }
    }

    #[test]
    fn too_few_eigenvalues_flagged() {
        let e = eta_default(&spec(vec![1.0, 2.0, -3.0]));
        assert!(!e.converged());
    }

    #[test]
    fn weyl_tail_handles_growing_density() {
        // a 2D-like spectrum with density ∝ |λ| and a shifted positive half
        let mut v = Vec::new();
        for k in 1..3000 {
            let r = libm::sqrt(k as f64);
            v.push(r + 0.3);
            v.push(-r);
        }
        let s = SpectrumData::new(v, Some(40.0), None).unwrap();
        let a = eta(&s, &EtaOptions { tail: TailModel::None, ..Default::default() });
        let b = eta(&s, &EtaOptions::default());
        assert!(a.value.is_finite() && b.value.is_finite());
        assert!(b.partial_sums.iter().zip(&a.partial_sums).any(|(x, y)| x != y));
    }

    fn db(b: f64) -> Result<Vec<f64>> {
        Ok(shifted_circle_spectrum(b, 20))
    }

    #[test]
    fn flow_through_one_crossing() {
        let grid: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        let f = spectral_flow(|s| db(0.25 + s), &grid, &FlowOptions::default()).unwrap();
        assert_eq!(f.sf, 1);
        assert_eq!(f.crossings.len(), 1);
        assert!((f.crossings[0].parameter - 0.75).abs() < 1e-8);
        assert_eq!(f.crossings[0].direction, 1);
    }

    #[test]
    fn constant_and_loop_families() {
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        assert_eq!(spectral_flow(|_| db(0.3), &grid, &FlowOptions::default()).unwrap().sf, 0);
        let back = spectral_flow(|s| db(0.25 + 2.0 * s.min(1.0 - s)), &grid, &FlowOptions::default()).unwrap();
        assert_eq!(back.sf, 0);
        assert_eq!(back.crossings.len(), 2);
    }

    #[test]
    fn crossing_at_a_node_is_isolated() {
        let grid = [0.0, 0.5, 1.0];
        let f = spectral_flow(|s| db(0.5 + s), &grid, &FlowOptions::default()).unwrap();
        assert_eq!(f.sf, 1);
        assert!((f.crossings[0].parameter - 0.5).abs() < 1e-8);
    }

    #[test]
    fn xi_jumps_by_crossing_count() {
        let before = eta_default(&spec(shifted_circle_spectrum(0.98, 2000)));
        let after = eta_default(&spec(shifted_circle_spectrum(1.02, 2000)));
        let f = spectral_flow(|s| db(0.98 + 0.04 * s), &[0.0, 1.0], &FlowOptions::default()).unwrap();
        let r = xi_difference_identity(&before, &after, &f, 0.0).unwrap();
        // ξ moves by −(0.04) continuously and by +SF across the crossing
        assert!((r.lhs + 0.04).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn square_loop_vanishes() {
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let r = sf_square(|x, y| db(0.2 + 0.7 * x + 0.6 * y), &grid, &FlowOptions::default()).unwrap();
        assert_eq!(r.loop_sf, 0);
        assert_eq!(r.forward(), (0, 1, 1, 0));
    }
}
