//! Bump triples, the cup product with the Bott generator, the loop unitary,
//! and even/odd/secondary Chern characters with their transgression forms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier_fn::{DifferentialForm, GridFunction};
use crate::linalg::{self, C64, I, ONE, ZERO};

/// default truncation of the Chern series
pub const K_MAX: usize = 3;

/// tolerance on unitarity / projection residuals of path nodes
pub const NODE_TOL: f64 = 1e-10;

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// exp-flat smoothstep on [0,1] and the pieces built from it
#[derive(Debug, Clone, Copy)]
struct Step {
    s: f64,
    one_minus_s: f64,
    ds: f64,
    root: f64,
    droot: f64,
}

fn step(y: f64) -> Step {
    if y <= 0.0 {
        return Step { s: 0.0, one_minus_s: 1.0, ds: 0.0, root: 0.0, droot: 0.0 };
    }
    if y >= 1.0 {
        return Step { s: 1.0, one_minus_s: 0.0, ds: 0.0, root: 0.0, droot: 0.0 };
    }
    let z = 1.0 / (1.0 - y) - 1.0 / y;
    let dz = 1.0 / ((1.0 - y) * (1.0 - y)) + 1.0 / (y * y);
    let (s, t) = (sigmoid(z), sigmoid(-z));
    let root = libm::sqrt(s * t);
    Step { s, one_minus_s: t, ds: s * t * dz, root, droot: 0.5 * root * (t - s) * dz }
}

/// values of the bump triple and its derived pieces at one angle
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpPoint {
    pub f: f64,
    pub df: f64,
    pub g: f64,
    pub dg: f64,
    pub h: f64,
    pub dh: f64,
    /// `√f₁` with `f₁ = χ_[0,1/2] f`
    pub sqrt_f1: f64,
    /// `√f₂` with `f₂ = χ_[1/2,1] f`
    pub sqrt_f2: f64,
    pub sqrt_one_minus_f: f64,
}

impl BumpPoint {
    pub fn f2(&self) -> f64 {
        self.sqrt_f2 * self.sqrt_f2
    }

    /// cut-off `ψ = 1 − f₂`
    pub fn psi(&self) -> f64 {
        1.0 - self.f2()
    }
}

/// The triple `(f, g, h)` with `f(0) = f(1) = 1`, `f(1/2) = 0`,
/// `g = χ_[0,1/2](f − f²)^{1/2}`, `h = χ_[1/2,1](f − f²)^{1/2}`, sampled on
/// `N_θ` points and evaluable anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    n_theta: usize,
    eps: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
}

impl BumpProfile {
    /// `f − f²` vanishes identically within `eps` of 0, 1/2 and 1
    pub fn new(n_theta: usize, eps: f64) -> Result<Self> {
        if n_theta < 8 || n_theta % 2 == 1 {
            return Err(Error::BadGrid(vec![n_theta]));
        }
        if !(eps > 0.0 && eps < 0.125) {
            return Err(Error::InvalidParameter(alloc::format!("flat width {eps} outside (0, 1/8)")));
        }
        if eps * (n_theta as f64) < 2.0 {
            return Err(Error::CoarseProfile { n: n_theta, eps });
        }
        let mut p = Self { n_theta, eps, f: Vec::new(), g: Vec::new(), h: Vec::new() };
        for j in 0..n_theta {
            let b = p.eval(j as f64 / n_theta as f64);
            p.f.push(b.f);
            p.g.push(b.g);
            p.h.push(b.h);
        }
        Ok(p)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 / self.n_theta as f64
    }

    /// `θ ∈ [0, 1]`; the endpoint 1 is kept distinct from 0
    pub fn eval(&self, theta: f64) -> BumpPoint {
        let len = 0.5 - 2.0 * self.eps;
        if theta <= 0.5 {
            let st = step((theta - self.eps) / len);
            BumpPoint {
                f: st.one_minus_s,
                df: -st.ds / len,
                g: st.root,
                dg: st.droot / len,
                h: 0.0,
                dh: 0.0,
                sqrt_f1: libm::sqrt(st.one_minus_s),
                sqrt_f2: 0.0,
                sqrt_one_minus_f: libm::sqrt(st.s),
            }
        } else {
            let st = step((theta - 0.5 - self.eps) / len);
            BumpPoint {
                f: st.s,
                df: st.ds / len,
                g: 0.0,
                dg: 0.0,
                h: st.root,
                dh: st.droot / len,
                sqrt_f1: 0.0,
                sqrt_f2: libm::sqrt(st.s),
                sqrt_one_minus_f: libm::sqrt(st.one_minus_s),
            }
        }
    }

    /// residuals of the defining conditions, all expected to vanish
    pub fn check(&self) -> ProfileCheck {
        let mut c = ProfileCheck::default();
        for j in 0..self.n_theta {
            let th = self.theta(j);
            let (f, g, h) = (self.f[j], self.g[j], self.h[j]);
            c.range = c.range.max((-f).max(f - 1.0).max(0.0));
            c.overlap = c.overlap.max(g * h);
            c.square_sum = c.square_sum.max((g * g + h * h - (f - f * f)).abs());
            if [0.0, 0.5, 1.0].iter().any(|&p| (th - p).abs() < self.eps) {
                c.flatness = c.flatness.max(f - f * f);
            }
        }
        c.endpoints = (self.eval(0.0).f - 1.0).abs().max((self.eval(1.0).f - 1.0).abs()).max(self.eval(0.5).f.abs());
        c
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct ProfileCheck {
    pub range: f64,
    pub endpoints: f64,
    pub overlap: f64,
    pub square_sum: f64,
    pub flatness: f64,
}

impl ProfileCheck {
    pub fn passes(&self) -> bool {
        self.range == 0.0 && self.endpoints == 0.0 && self.overlap == 0.0 && self.square_sum < 1e-12 && self.flatness < 1e-14
    }
}

/// `∫₀¹ (2 − 4f) h′ h^{2k−1} + 4 f′ h^{2k} dθ` by the periodic trapezoid rule
pub fn lemma_id_integral(profile: &BumpProfile, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = profile.n_theta();
    let sum: f64 = (0..n)
        .map(|j| {
            let b = profile.eval(profile.theta(j));
            let h1 = libm::pow(b.h, (2 * k - 1) as f64);
            (2.0 - 4.0 * b.f) * b.dh * h1 + 4.0 * b.df * h1 * b.h
        })
        .sum();
    Ok(sum / n as f64)
}

/// `(k−1)!² / (2k−1)!`
pub fn lemma_id_closed_form(k: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(k - 1) * fact(k - 1) / fact(2 * k - 1)
}

fn require_unitary(u: &GridFunction) -> Result<()> {
    let r = u.max_unitarity_residual();
    if r > NODE_TOL {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

fn cup_block(b: &BumpPoint, u: &[C64], n: usize, out: &mut [C64]) {
    let m = 2 * n;
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { ONE } else { ZERO };
            out[i * m + j] = d * b.f;
            out[(n + i) * m + n + j] = d * (1.0 - b.f);
            out[i * m + n + j] = d * b.g + u[i * n + j] * b.h;
            out[(n + i) * m + j] = d * b.g + u[j * n + i].conj() * b.h;
        }
    }
}

/// `e_U = [[f, g + hU], [hU* + g, 1 − f]]` on `S¹ × T^d`, the circle first
pub fn cup_with_bott(u: &GridFunction, profile: &BumpProfile) -> Result<GridFunction> {
    require_unitary(u)?;
    let n = u.matrix_dim();
    let nt = profile.n_theta();
    let mut dims = vec![nt];
    dims.extend_from_slice(u.dims());
    let rest = u.npts();
    let m = 2 * n;
    let mut values = vec![ZERO; nt * rest * m * m];
    for j in 0..nt {
        let b = profile.eval(profile.theta(j));
        for p in 0..rest {
            let off = (j * rest + p) * m * m;
            cup_block(&b, u.point(p), n, &mut values[off..off + m * m]);
        }
    }
    GridFunction::new(&dims, m, values)
}

/// `𝒰(θ)` for a single unitary block, any `θ ∈ [0, 1]`
pub fn loop_unitary_block(u: &[C64], n: usize, b: &BumpPoint) -> Vec<C64> {
    let m = 2 * n;
    let mut out = vec![ZERO; m * m];
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { ONE } else { ZERO };
            out[i * m + j] = d * b.sqrt_f1 + u[i * n + j] * b.sqrt_f2;
            out[(n + i) * m + n + j] = -(d * b.sqrt_f1) - u[j * n + i].conj() * b.sqrt_f2;
            out[i * m + n + j] = d * b.sqrt_one_minus_f;
            out[(n + i) * m + j] = d * b.sqrt_one_minus_f;
        }
    }
    out
}

/// the loop unitary sampled on the profile grid; it is not periodic, with
/// `𝒰(0) = diag(I, −I)` and `𝒰(1) = diag(U, −U*)`
pub fn loop_unitary(u: &GridFunction, profile: &BumpProfile) -> Result<GridFunction> {
    require_unitary(u)?;
    let n = u.matrix_dim();
    let nt = profile.n_theta();
    let mut dims = vec![nt];
    dims.extend_from_slice(u.dims());
    let m = 2 * n;
    let mut values = Vec::with_capacity(nt * u.npts() * m * m);
    for j in 0..nt {
        let b = profile.eval(profile.theta(j));
        for p in 0..u.npts() {
            values.extend(loop_unitary_block(u.point(p), n, &b));
        }
    }
    GridFunction::new(&dims, m, values)
}

/// `max |𝒰 diag(I,0) 𝒰* − e_U|` and `max |𝒰*𝒰 − I|` over the grid
pub fn loop_conjugation_residual(u: &GridFunction, profile: &BumpProfile) -> Result<(f64, f64)> {
    let e = cup_with_bott(u, profile)?;
    let w = loop_unitary(u, profile)?;
    let m = w.matrix_dim();
    let n = m / 2;
    let mut proj = vec![ZERO; m * m];
    for i in 0..n {
        proj[i * m + i] = ONE;
    }
    let id = linalg::identity_block(m);
    let mut conj = 0.0f64;
    let mut unit = 0.0f64;
    for (wp, ep) in w.points().zip(e.points()) {
        let wa = linalg::adjoint_block(wp, m);
        let c = linalg::mul(&linalg::mul(wp, &proj, m), &wa, m);
        conj = conj.max(linalg::max_abs_diff(&c, ep));
        unit = unit.max(linalg::max_abs_diff(&linalg::mul(&wa, wp, m), &id));
    }
    Ok((conj, unit))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn two_pi_i_pow(k: i32) -> C64 {
    (2.0 * PI * I).powi(k)
}

/// entry `p` holds `base^(p+1)`; stops early once the powers vanish by degree
fn power_series(base: &DifferentialForm, max_power: usize) -> Result<Vec<DifferentialForm>> {
    let mut out = vec![base.clone()];
    while out.len() < max_power {
        let next = out.last().unwrap().wedge(base)?;
        if next.raw_components().is_empty() {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

/// `Ch(p) = tr p + Σ_k (−1)^k (2πi)^{−k} (1/k!) tr(p (dp)^{2k})`
pub fn chern_even(p: &GridFunction, k_max: usize) -> Result<DifferentialForm> {
    let pf = DifferentialForm::from_function(p.clone());
    let dp = pf.d_exterior()?;
    let mut ch = pf.trace();
    let powers = power_series(&dp, 2 * k_max)?;
    for k in 1..=k_max {
        let Some(dp2k) = powers.get(2 * k - 1) else { break };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coef = two_pi_i_pow(-(k as i32)) * (sign / factorial(k));
        ch = ch.add(&pf.wedge(dp2k)?.trace().scale(coef))?;
    }
    Ok(ch)
}

/// `Ch(U) = Σ_k (2πi)^{−(k+1)} k!/(2k+1)! tr((U⁻¹dU)^{2k+1})`
pub fn chern_odd(u: &GridFunction, k_max: usize) -> Result<DifferentialForm> {
    require_unitary(u)?;
    let uf = DifferentialForm::from_function(u.clone());
    let omega = DifferentialForm::from_function(u.adjoint()).wedge(&uf.d_exterior()?)?;
    let powers = power_series(&omega, 2 * k_max + 1)?;
    let mut ch = DifferentialForm::zero(u.dims(), 1)?;
    for k in 0..=k_max {
        let Some(w) = powers.get(2 * k) else { break };
        let coef = two_pi_i_pow(-(k as i32 + 1)) * (factorial(k) / factorial(2 * k + 1));
        ch = ch.add(&w.trace().scale(coef))?;
    }
    Ok(ch)
}

/// uniformly sampled path `s ↦ X_s`, `s ∈ [0, 1]`
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionPath {
    nodes: Vec<GridFunction>,
}

impl FunctionPath {
    fn new(nodes: Vec<GridFunction>) -> Result<Self> {
        let Some(first) = nodes.first() else {
            return Err(Error::InvalidParameter("empty path".into()));
        };
        if nodes.len() > 1 && (nodes.len() < 5 || nodes.len().is_multiple_of(2)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "N_s = {} must be 1 or odd and at least 5",
                nodes.len()
            )));
        }
        if nodes.iter().any(|g| g.dims() != first.dims() || g.matrix_dim() != first.matrix_dim()) {
            return Err(Error::DimMismatch("path nodes differ in shape".into()));
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &GridFunction {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[GridFunction] {
        &self.nodes
    }

    pub fn s(&self, i: usize) -> f64 {
        if self.nodes.len() == 1 {
            0.0
        } else {
            i as f64 / (self.nodes.len() - 1) as f64
        }
    }

    pub fn dims(&self) -> &[usize] {
        self.nodes[0].dims()
    }

    pub fn matrix_dim(&self) -> usize {
        self.nodes[0].matrix_dim()
    }

    /// `∂_s X` at node `i` by fourth-order differences
    pub fn derivative(&self, i: usize) -> Result<GridFunction> {
        let w = fourth_order_stencil(self.nodes.len(), i)?;
        let mut acc = self.nodes[w[0].0].scale(C64::new(w[0].1, 0.0));
        for &(j, c) in &w[1..] {
            acc = acc.add(&self.nodes[j].scale(C64::new(c, 0.0)))?;
        }
        Ok(acc)
    }

    /// gap between second- and fourth-order `s`-derivatives relative to the
    /// derivative size; large values mean the s-grid is too coarse
    pub fn s_certificate(&self) -> Result<f64> {
        let n = self.nodes.len();
        if n == 1 {
            return Ok(0.0);
        }
        let h = 1.0 / (n - 1) as f64;
        let size = self.nodes.iter().map(GridFunction::sup_norm).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for i in 1..n - 1 {
            let d4 = self.derivative(i)?;
            let d2 = self.nodes[i + 1].sub(&self.nodes[i - 1])?.scale(C64::new(0.5 / h, 0.0));
            let scale = d4.sup_norm().max(1e-8 * size).max(1e-300);
            worst = worst.max(d4.max_diff(&d2)? / scale);
        }
        Ok(worst)
    }
}

/// threshold on [`FunctionPath::s_certificate`]
pub const S_CERT_THRESHOLD: f64 = 1e-2;

fn fourth_order_stencil(n: usize, i: usize) -> Result<Vec<(usize, f64)>> {
    if n < 5 {
        return Err(Error::InvalidParameter("s-derivative needs at least 5 nodes".into()));
    }
    let inv = (n - 1) as f64 / 12.0;
    let fwd0 = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let fwd1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
    Ok(if i == 0 {
        (0..5).map(|k| (k, fwd0[k] * inv)).collect()
    } else if i == 1 {
        (0..5).map(|k| (k, fwd1[k] * inv)).collect()
    } else if i == n - 1 {
        (0..5).map(|k| (n - 1 - k, -fwd0[k] * inv)).collect()
    } else if i == n - 2 {
        (0..5).map(|k| (n - 1 - k, -fwd1[k] * inv)).collect()
    } else {
        [(i - 2, 1.0), (i - 1, -8.0), (i + 1, 8.0), (i + 2, -1.0)].iter().map(|&(j, c)| (j, c * inv)).collect()
    })
}

fn combine_forms(forms: &[DifferentialForm], weights: &[(usize, f64)]) -> Result<DifferentialForm> {
    let mut acc = forms[weights[0].0].scale(C64::new(weights[0].1, 0.0));
    for &(j, c) in &weights[1..] {
        acc = acc.add(&forms[j].scale(C64::new(c, 0.0)))?;
    }
    Ok(acc)
}

/// fourth-order `∂_s` of a sampled family of forms at node `i`
pub fn s_derivative_forms(forms: &[DifferentialForm], i: usize) -> Result<DifferentialForm> {
    combine_forms(forms, &fourth_order_stencil(forms.len(), i)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPath(FunctionPath);

impl UnitaryPath {
    pub fn new(nodes: Vec<GridFunction>) -> Result<Self> {
        for u in &nodes {
            require_unitary(u)?;
        }
        Ok(Self(FunctionPath::new(nodes)?))
    }

    pub fn single(u: GridFunction) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn path(&self) -> &FunctionPath {
        &self.0
    }

    /// the projection path `s ↦ e_{U_s}`
    pub fn cup_with_bott(&self, profile: &BumpProfile) -> Result<ProjectionPath> {
        ProjectionPath::new(self.0.nodes.iter().map(|u| cup_with_bott(u, profile)).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPath(FunctionPath);

impl ProjectionPath {
    pub fn new(nodes: Vec<GridFunction>) -> Result<Self> {
        for p in &nodes {
            let r = p.max_projection_residual();
            if r > NODE_TOL {
                return Err(Error::NotProjection(r));
            }
        }
        Ok(Self(FunctionPath::new(nodes)?))
    }

    pub fn path(&self) -> &FunctionPath {
        &self.0
    }
}

fn check_s_smooth(path: &FunctionPath) -> Result<()> {
    let c = path.s_certificate()?;
    if c > S_CERT_THRESHOLD {
        return Err(Error::CoarsePath(c));
    }
    Ok(())
}

/// `ds ∧ C̃h(U_s)` at every node, with
/// `C̃h(U) = Σ_k (−1)^k (2πi)^{−(k+1)} k!/(2k)! tr(U⁻¹U̇ (U dU⁻¹)^{2k})`
pub fn secondary_chern_odd(path: &UnitaryPath, k_max: usize) -> Result<Vec<DifferentialForm>> {
    let fp = path.path();
    if fp.len() == 1 {
        return Ok(vec![DifferentialForm::zero(fp.dims(), 1)?]);
    }
    check_s_smooth(fp)?;
    (0..fp.len())
        .map(|i| {
            let u = fp.node(i);
            let udot = fp.derivative(i)?;
            let lead = DifferentialForm::from_function(u.adjoint().mul(&udot)?);
            let ustar = DifferentialForm::from_function(u.adjoint());
            let w = DifferentialForm::from_function(u.clone()).wedge(&ustar.d_exterior()?)?;
            let powers = power_series(&w, 2 * k_max)?;
            let mut acc = lead.trace().scale(two_pi_i_pow(-1));
            for k in 1..=k_max {
                let Some(wk) = powers.get(2 * k - 1) else { break };
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let coef = two_pi_i_pow(-(k as i32 + 1)) * (sign * factorial(k) / factorial(2 * k));
                acc = acc.add(&lead.wedge(wk)?.trace().scale(coef))?;
            }
            acc.ds_wedge()
        })
        .collect()
}

/// `ds ∧ C̃h(e_s)` at every node, with
/// `C̃h(e) = Σ_k (−1)^{k+1} (2πi)^{−(k+1)} (1/k!) tr((2e − 1) ė (de)^{2k+1})`
pub fn secondary_chern_even(path: &ProjectionPath, k_max: usize) -> Result<Vec<DifferentialForm>> {
    let fp = path.path();
    if fp.len() == 1 {
        return Ok(vec![DifferentialForm::zero(fp.dims(), 1)?]);
    }
    check_s_smooth(fp)?;
    let m = fp.matrix_dim();
    let id = GridFunction::constant(fp.dims(), m, &linalg::identity_block(m))?;
    (0..fp.len())
        .map(|i| {
            let e = fp.node(i);
            let edot = fp.derivative(i)?;
            let two_e_minus_1 = e.scale(C64::new(2.0, 0.0)).sub(&id)?;
            let lead = DifferentialForm::from_function(two_e_minus_1.mul(&edot)?);
            let de = DifferentialForm::from_function(e.clone()).d_exterior()?;
            let powers = power_series(&de, 2 * k_max + 1)?;
            let mut acc = DifferentialForm::zero(fp.dims(), 1)?;
            for k in 0..=k_max {
                let Some(dek) = powers.get(2 * k) else { break };
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                let coef = two_pi_i_pow(-(k as i32 + 1)) * (sign / factorial(k));
                acc = acc.add(&lead.wedge(dek)?.trace().scale(coef))?;
            }
            acc.ds_wedge()
        })
        .collect()
}

/// `Tch = ∫₀¹ ds ∧ C̃h` by composite Simpson over the nodes of a
/// secondary Chern family (each carrying `ds`)
pub fn tch(secondary: &[DifferentialForm]) -> Result<DifferentialForm> {
    let n = secondary.len();
    let first = secondary.first().ok_or_else(|| Error::InvalidParameter("empty family".into()))?;
    if n == 1 {
        return DifferentialForm::zero(first.dims(), 1);
    }
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParameter("Simpson needs an odd node count".into()));
    }
    let h = 1.0 / (n - 1) as f64;
    let weights: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let w = match i {
                0 => 1.0,
                _ if i == n - 1 => 1.0,
                _ if i % 2 == 1 => 4.0,
                _ => 2.0,
            };
            (i, w * h / 3.0)
        })
        .collect();
    let coefs: Vec<DifferentialForm> = secondary.iter().map(DifferentialForm::ds_coefficient).collect();
    combine_forms(&coefs, &weights)
}

pub fn tch_unitary(path: &UnitaryPath, k_max: usize) -> Result<DifferentialForm> {
    tch(&secondary_chern_odd(path, k_max)?)
}

pub fn tch_projection(path: &ProjectionPath, k_max: usize) -> Result<DifferentialForm> {
    tch(&secondary_chern_even(path, k_max)?)
}

/// `max_i ‖∂_s Ch(U_s) − d C̃h(U_s)‖_∞`
pub fn transgression_residual(path: &UnitaryPath, k_max: usize) -> Result<f64> {
    let fp = path.path();
    let ch: Vec<DifferentialForm> = fp.nodes().iter().map(|u| chern_odd(u, k_max)).collect::<Result<_>>()?;
    let sec = secondary_chern_odd(path, k_max)?;
    let mut worst = 0.0f64;
    for (i, c) in sec.iter().enumerate() {
        let lhs = s_derivative_forms(&ch, i)?;
        let rhs = c.ds_coefficient().d_exterior()?;
        worst = worst.max(lhs.max_diff(&rhs)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn winding(n: i32, dims: &[usize]) -> GridFunction {
        GridFunction::scalar(dims, |x| (I * 2.0 * PI * n as f64 * x[0]).exp()).unwrap()
    }

    #[test]
    fn profile_invariants_hold() {
        let p = BumpProfile::new(256, 0.05).unwrap();
        let c = p.check();
        assert!(c.passes(), "{c:?}");
        assert_eq!(p.eval(0.5).f, 0.0);
        assert_eq!(p.eval(0.0).f, 1.0);
        assert_eq!(p.eval(1.0).f, 1.0);
    }

    #[test]
    fn coarse_profile_rejected() {
        assert!(matches!(BumpProfile::new(16, 0.05), Err(Error::CoarseProfile { .. })));
        assert!(BumpProfile::new(64, 0.2).is_err());
        assert!(BumpProfile::new(63, 0.05).is_err());
    }

    #[test]
    fn f_prime_h_squared_is_one_sixth() {
        let p = BumpProfile::new(256, 0.05).unwrap();
        let v: f64 = (0..256)
            .map(|j| {
                let b = p.eval(p.theta(j));
                b.df * b.h * b.h
            })
            .sum::<f64>()
            / 256.0;
        assert!((v - 1.0 / 6.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn lemma_values() {
        let p = BumpProfile::new(512, 0.05).unwrap();
        let want = [1.0, 1.0 / 6.0, 1.0 / 30.0, 1.0 / 140.0, 1.0 / 630.0];
        for k in 1..=5u32 {
            assert!((lemma_id_closed_form(k) - want[k as usize - 1]).abs() < 1e-15);
            let v = lemma_id_integral(&p, k).unwrap();
            assert!((v - want[k as usize - 1]).abs() < 1e-10, "k={k}: {v}");
        }
    }

    #[test]
    fn analytic_derivative_matches_finite_differences() {
        let p = BumpProfile::new(256, 0.05).unwrap();
        let h = 1e-6;
        for j in 1..255 {
            let th = p.theta(j);
            let b = p.eval(th);
            let fd = (p.eval(th + h).f - p.eval(th - h).f) / (2.0 * h);
            assert!((fd - b.df).abs() < 1e-5, "θ={th}");
            let fdh = (p.eval(th + h).h - p.eval(th - h).h) / (2.0 * h);
            assert!((fdh - b.dh).abs() < 1e-5, "θ={th}");
        }
    }

    #[test]
    fn cup_contract_on_circle() {
        let p = BumpProfile::new(64, 0.05).unwrap();
        let u = winding(1, &[32]);
        let e = cup_with_bott(&u, &p).unwrap();
        assert!(e.max_projection_residual() < 1e-12);
        let e0 = e.point(0);
        assert_eq!(e0[0], ONE);
        assert!(e0[1].norm() < 1e-15 && e0[3].norm() < 1e-15);
        let (conj, unit) = loop_conjugation_residual(&u, &p).unwrap();
        assert!(conj < 1e-12 && unit < 1e-12);
    }

    #[test]
    fn loop_unitary_endpoints() {
        let p = BumpProfile::new(64, 0.05).unwrap();
        let u = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.8), C64::new(0.6, 0.0)];
        // the lower-right entry −√f₁ makes 𝒰(0) = diag(I, −I)
        let w0 = loop_unitary_block(&u, 2, &p.eval(0.0));
        let mut want0 = linalg::identity_block(4);
        want0[10] = -ONE;
        want0[15] = -ONE;
        assert!(linalg::max_abs_diff(&w0, &want0) < 1e-15);
        let w1 = loop_unitary_block(&u, 2, &p.eval(1.0));
        let mut want = vec![ZERO; 16];
        for i in 0..2 {
            for j in 0..2 {
                want[i * 4 + j] = u[i * 2 + j];
                want[(2 + i) * 4 + 2 + j] = -u[j * 2 + i].conj();
            }
        }
        assert!(linalg::max_abs_diff(&w1, &want) < 1e-15);
    }

    #[test]
    fn chern_of_constant_projection() {
        let blk = [ONE, ZERO, ZERO, ZERO];
        let p = GridFunction::constant(&[16, 16], 2, &blk).unwrap();
        let ch = chern_even(&p, K_MAX).unwrap();
        assert!((ch.component(&[]).unwrap().values()[0] - ONE).norm() < 1e-15);
        assert!(ch.degree_part(2).sup_norm() < 1e-14);
    }

    #[test]
    fn odd_chern_of_winding() {
        for n in -2..=2 {
            let ch = chern_odd(&winding(n, &[64]), K_MAX).unwrap();
            assert!((ch.integrate().unwrap() - C64::new(n as f64, 0.0)).norm() < 1e-10);
        }
        let c = GridFunction::constant(&[16], 1, &[C64::new(0.0, 1.0)]).unwrap();
        assert!(chern_odd(&c, K_MAX).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn cup_of_winding_has_chern_number_minus_n() {
        let p = BumpProfile::new(128, 0.05).unwrap();
        for n in -2..=2 {
            let e = cup_with_bott(&winding(n, &[32]), &p).unwrap();
            let v = chern_even(&e, K_MAX).unwrap().degree_part(2).integrate().unwrap();
            assert!((v + C64::new(n as f64, 0.0)).norm() < 1e-8, "n={n}: {v}");
        }
    }

    #[test]
    fn pushforward_of_cup_is_minus_odd_chern() {
        let p = BumpProfile::new(128, 0.05).unwrap();
        let u = GridFunction::scalar(&[32], |x| {
            (I * 2.0 * PI * x[0] + I * 0.3 * libm::sin(2.0 * PI * x[0])).exp()
        })
        .unwrap();
        let e = cup_with_bott(&u, &p).unwrap();
        let lhs = chern_even(&e, K_MAX).unwrap().pushforward_circle().unwrap();
        let rhs = chern_odd(&u, K_MAX).unwrap();
        assert!(lhs.add(&rhs).unwrap().sup_norm() < 1e-8);
    }

    #[test]
    fn scalar_phase_path_secondary_character() {
        // U_s = e^{2πis} I₂ gives C̃h = (2πi)⁻¹ tr(2πi I₂) = 2
        let nodes: Vec<GridFunction> = (0..65)
            .map(|i| {
                let z = (I * 2.0 * PI * (i as f64 / 64.0)).exp();
                GridFunction::constant(&[8, 8], 2, &[z, ZERO, ZERO, z]).unwrap()
            })
            .collect();
        let path = UnitaryPath::new(nodes).unwrap();
        for f in secondary_chern_odd(&path, K_MAX).unwrap() {
            let c0 = f.ds_coefficient();
            let v = c0.component(&[]).unwrap();
            assert!(v.values().iter().all(|z| (z - C64::new(2.0, 0.0)).norm() < 1e-3));
        }
    }

    #[test]
    fn constant_path_has_no_transgression() {
        let u = winding(1, &[16]);
        let path = UnitaryPath::new(vec![u; 5]).unwrap();
        assert!(tch_unitary(&path, K_MAX).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn non_unitary_rejected() {
        let u = GridFunction::scalar(&[16], |_| C64::new(2.0, 0.0)).unwrap();
        let p = BumpProfile::new(64, 0.05).unwrap();
        assert!(matches!(cup_with_bott(&u, &p), Err(Error::NotUnitary(_))));
    }
}
