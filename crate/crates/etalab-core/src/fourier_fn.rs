//! Matrix-valued functions and differential forms on flat tori `(R/Z)^d`.
//!
//! Functions are stored as samples on a uniform product grid; derivatives go
//! through the discrete Fourier transform with the Nyquist mode discarded.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};

/// default tail-energy threshold of the smoothness certificate
pub const SMOOTH_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// fraction of spectral energy with some |k_i| > N_i/3
    pub tail_fraction: f64,
    pub threshold: f64,
}

impl Certificate {
    pub fn smooth(&self) -> bool {
        self.tail_fraction <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dims: Vec<usize>,
    m: usize,
    values: Vec<C64>,
    certificate: Option<Certificate>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.len() > 3 || dims.iter().any(|&n| n < 8 || n % 2 == 1) {
        return Err(Error::BadGrid(dims.to_vec()));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(dims: &[usize], m: usize, values: Vec<C64>) -> Result<Self> {
        check_dims(dims)?;
        let npts: usize = dims.iter().product();
        if m == 0 || values.len() != npts * m * m {
            return Err(Error::DimMismatch(alloc::format!(
                "{} values for {npts} points of {m}x{m} matrices",
                values.len()
            )));
        }
        Ok(Self { dims: dims.to_vec(), m, values, certificate: None })
    }

    /// sample `f(x, out)` at the grid points `x_i = j_i / N_i`
    pub fn from_fn(dims: &[usize], m: usize, mut f: impl FnMut(&[f64], &mut [C64])) -> Result<Self> {
        check_dims(dims)?;
        let npts: usize = dims.iter().product();
        let mut values = vec![ZERO; npts * m * m];
        let mut x = vec![0.0; dims.len()];
        for (p, block) in values.chunks_mut(m * m).enumerate() {
            grid_coords(dims, p, &mut x);
            f(&x, block);
        }
        Self::new(dims, m, values)
    }

    /// like [`from_fn`](Self::from_fn) but declares the input smooth and
    /// attaches a certificate
    pub fn smooth_from_fn(dims: &[usize], m: usize, f: impl FnMut(&[f64], &mut [C64])) -> Result<Self> {
        Ok(Self::from_fn(dims, m, f)?.certify(SMOOTH_THRESHOLD))
    }

    pub fn constant(dims: &[usize], m: usize, block: &[C64]) -> Result<Self> {
        Self::from_fn(dims, m, |_, out| out.copy_from_slice(block))
    }

    pub fn scalar(dims: &[usize], mut f: impl FnMut(&[f64]) -> C64) -> Result<Self> {
        Self::from_fn(dims, 1, |x, out| out[0] = f(x))
    }

    pub fn certify(mut self, threshold: f64) -> Self {
        let tail = tail_fraction(&self.dims, self.m * self.m, &self.values);
        self.certificate = Some(Certificate { tail_fraction: tail, threshold });
        self
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    /// true when a smoothness certificate exists and fails
    pub fn flagged(&self) -> bool {
        self.certificate.is_some_and(|c| !c.smooth())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.m
    }

    pub fn npts(&self) -> usize {
        self.values.len() / (self.m * self.m)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn point(&self, p: usize) -> &[C64] {
        let b = self.m * self.m;
        &self.values[p * b..(p + 1) * b]
    }

    pub fn points(&self) -> impl Iterator<Item = &[C64]> {
        self.values.chunks(self.m * self.m)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims || self.m != other.m {
            return Err(Error::DimMismatch(alloc::format!(
                "{:?}/{} vs {:?}/{}",
                self.dims,
                self.m,
                other.dims,
                other.m
            )));
        }
        Ok(())
    }

    fn derived(&self, values: Vec<C64>, m: usize) -> Self {
        Self { dims: self.dims.clone(), m, values, certificate: None }
    }

    pub fn map_points(&self, m_out: usize, mut f: impl FnMut(&[C64], &mut [C64])) -> Self {
        let mut values = vec![ZERO; self.npts() * m_out * m_out];
        for (src, dst) in self.points().zip(values.chunks_mut(m_out * m_out)) {
            f(src, dst);
        }
        self.derived(values, m_out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.derived(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(), self.m))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.derived(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(), self.m))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.derived(self.values.iter().map(|a| a * s).collect(), self.m);
        out.certificate = self.certificate;
        out
    }

    /// pointwise matrix product; a scalar factor (m = 1) broadcasts
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(alloc::format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let (ma, mb) = (self.m, other.m);
        if ma == 1 || mb == 1 {
            let m = ma.max(mb);
            let (s, mat) = if ma == 1 { (self, other) } else { (other, self) };
            let values = mat
                .points()
                .enumerate()
                .flat_map(|(p, blk)| {
                    let c = s.values[p];
                    blk.iter().map(move |v| v * c)
                })
                .collect();
            return Ok(self.derived(values, m));
        }
        if ma != mb {
            return Err(Error::DimMismatch(alloc::format!("matrix dims {ma} vs {mb}")));
        }
        let mut values = vec![ZERO; self.values.len()];
        for ((a, b), out) in self.points().zip(other.points()).zip(values.chunks_mut(ma * ma)) {
            linalg::mul_into(a, b, out, ma);
        }
        Ok(self.derived(values, ma))
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        self.map_points(m, |a, out| {
            for i in 0..m {
                for j in 0..m {
                    out[j * m + i] = a[i * m + j].conj();
                }
            }
        })
    }

    pub fn trace(&self) -> Self {
        let m = self.m;
        self.map_points(1, |a, out| out[0] = linalg::trace_block(a, m))
    }

    pub fn sup_norm(&self) -> f64 {
        linalg::max_abs_slice(&self.values)
    }

    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(linalg::max_abs_diff(&self.values, &other.values))
    }

    /// grid mean, i.e. the trapezoid rule for the integral over the torus
    pub fn mean(&self) -> Vec<C64> {
        let b = self.m * self.m;
        let mut acc = vec![ZERO; b];
        for blk in self.points() {
            for (a, v) in acc.iter_mut().zip(blk) {
                *a += v;
            }
        }
        let n = self.npts() as f64;
        acc.into_iter().map(|a| a / n).collect()
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        let m = self.m;
        let id = linalg::identity_block(m);
        self.points()
            .map(|u| {
                let uu = linalg::mul(&linalg::adjoint_block(u, m), u, m);
                linalg::max_abs_diff(&uu, &id)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_projection_residual(&self) -> f64 {
        let m = self.m;
        self.points()
            .map(|p| {
                let pp = linalg::mul(p, p, m);
                linalg::max_abs_diff(&pp, p).max(linalg::max_abs_diff(&linalg::adjoint_block(p, m), p))
            })
            .fold(0.0, f64::max)
    }

    /// Fourier coefficients over all axes (forward DFT divided by the point count)
    pub fn spectrum(&self) -> Vec<C64> {
        let mut data = self.values.clone();
        for axis in 0..self.dims.len() {
            dft_axis(&mut data, &self.dims, self.m * self.m, axis, false);
        }
        let n = self.npts() as f64;
        data.iter_mut().for_each(|v| *v /= n);
        data
    }
}

pub fn grid_coords(dims: &[usize], mut p: usize, x: &mut [f64]) {
    for a in (0..dims.len()).rev() {
        x[a] = (p % dims[a]) as f64 / dims[a] as f64;
        p /= dims[a];
    }
}

/// signed wavenumber of DFT index `k`; `None` for the Nyquist index
pub fn wavenumber(k: usize, n: usize) -> Option<i64> {
    if 2 * k == n {
        None
    } else if 2 * k < n {
        Some(k as i64)
    } else {
        Some(k as i64 - n as i64)
    }
}

fn axis_layout(dims: &[usize], block: usize, axis: usize) -> (usize, usize, usize) {
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = block * dims[axis + 1..].iter().product::<usize>();
    (outer, dims[axis], inner)
}

fn twiddles(n: usize, inverse: bool) -> Vec<C64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|j| {
            let a = sign * 2.0 * PI * j as f64 / n as f64;
            C64::new(libm::cos(a), libm::sin(a))
        })
        .collect()
}

/// unnormalised DFT along one axis, in place
fn dft_axis(data: &mut [C64], dims: &[usize], block: usize, axis: usize, inverse: bool) {
    let (outer, n, inner) = axis_layout(dims, block, axis);
    let w = twiddles(n, inverse);
    let mut line = vec![ZERO; n];
    for o in 0..outer {
        for q in 0..inner {
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[(o * n + j) * inner + q];
            }
            for k in 0..n {
                let mut acc = ZERO;
                for (j, l) in line.iter().enumerate() {
                    acc += l * w[(j * k) % n];
                }
                data[(o * n + k) * inner + q] = acc;
            }
        }
    }
}

fn tail_fraction(dims: &[usize], block: usize, values: &[C64]) -> f64 {
    let mut data = values.to_vec();
    for axis in 0..dims.len() {
        dft_axis(&mut data, dims, block, axis, false);
    }
    let (mut total, mut tail) = (0.0, 0.0);
    let mut idx = vec![0usize; dims.len()];
    for (p, blk) in data.chunks(block).enumerate() {
        let mut q = p;
        for a in (0..dims.len()).rev() {
            idx[a] = q % dims[a];
            q /= dims[a];
        }
        let e: f64 = blk.iter().map(|v| v.norm_sqr()).sum();
        total += e;
        let high = idx.iter().zip(dims).any(|(&k, &n)| {
            let kk = wavenumber(k, n).map_or(n as i64 / 2, |k| k.abs());
            3 * kk as usize > n
        });
        if high {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// `∂f/∂x_axis` by multiplying Fourier coefficients with `2πik`
pub fn spectral_derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= f.dims.len() {
        return Err(Error::InvalidParameter(alloc::format!("axis {axis} on a {}-torus", f.dims.len())));
    }
    let block = f.m * f.m;
    let mut data = f.values.clone();
    dft_axis(&mut data, &f.dims, block, axis, false);
    let (outer, n, inner) = axis_layout(&f.dims, block, axis);
    for o in 0..outer {
        for k in 0..n {
            let factor = match wavenumber(k, n) {
                Some(kk) => C64::new(0.0, 2.0 * PI * kk as f64 / n as f64),
                None => ZERO,
            };
            let base = (o * n + k) * inner;
            data[base..base + inner].iter_mut().for_each(|v| *v *= factor);
        }
    }
    dft_axis(&mut data, &f.dims, block, axis, true);
    let mut out = f.derived(data, f.m);
    // an input that failed its certificate taints the derivative
    out.certificate = f.certificate;
    Ok(out)
}

/// coordinate symbols of a form component; `S` is the external path
/// parameter and sorts before every torus coordinate
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    S,
    X(usize),
}

impl Symbol {
    fn bit(self) -> u8 {
        match self {
            Symbol::S => 1,
            Symbol::X(i) => 1 << (i + 1),
        }
    }
}

const S_BIT: u8 = 1;

fn torus_bits(mask: u8) -> u8 {
    mask & !S_BIT
}

/// sign of moving `bit` past every set bit of `mask` below it
fn insertion_sign(mask: u8, bit: u8) -> f64 {
    if (mask & (bit - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// sign of `dx_I ∧ dx_J` relative to the sorted union
fn merge_sign(a: u8, b: u8) -> f64 {
    let mut swaps = 0;
    let mut bb = b;
    while bb != 0 {
        let bit = bb & bb.wrapping_neg();
        // elements of a above this bit must hop over it
        swaps += (a & !(bit | (bit - 1))).count_ones();
        bb &= bb - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn mask_symbols(mask: u8) -> Vec<Symbol> {
    let mut out = Vec::new();
    if mask & S_BIT != 0 {
        out.push(Symbol::S);
    }
    for i in 0..7 {
        if mask & (1 << (i + 1)) != 0 {
            out.push(Symbol::X(i));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    dims: Vec<usize>,
    m: usize,
    comps: BTreeMap<u8, GridFunction>,
}

impl DifferentialForm {
    pub fn zero(dims: &[usize], m: usize) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), m, comps: BTreeMap::new() })
    }

    pub fn from_function(f: GridFunction) -> Self {
        let mut comps = BTreeMap::new();
        let (dims, m) = (f.dims.clone(), f.m);
        comps.insert(0, f);
        Self { dims, m, comps }
    }

    /// `coef · dx_{symbols}`; the symbols are sorted and the reordering sign
    /// absorbed into the coefficient
    pub fn monomial(symbols: &[Symbol], coef: GridFunction) -> Result<Self> {
        let mut mask = 0u8;
        let mut sign = 1.0;
        for &s in symbols {
            if let Symbol::X(i) = s {
                if i >= coef.dim() {
                    return Err(Error::InvalidParameter(alloc::format!("coordinate {i} on a {}-torus", coef.dim())));
                }
            }
            let bit = s.bit();
            if mask & bit != 0 {
                return Err(Error::RepeatedIndex);
            }
            // appending `bit` after the current (sorted) mask
            if (mask & !(bit | (bit - 1))).count_ones() % 2 == 1 {
                sign = -sign;
            }
            mask |= bit;
        }
        let (dims, m) = (coef.dims.clone(), coef.m);
        let mut comps = BTreeMap::new();
        comps.insert(mask, coef.scale(C64::new(sign, 0.0)));
        Ok(Self { dims, m, comps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix_dim(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> impl Iterator<Item = (Vec<Symbol>, &GridFunction)> {
        self.comps.iter().map(|(&k, v)| (mask_symbols(k), v))
    }

    pub fn component(&self, symbols: &[Symbol]) -> Option<&GridFunction> {
        let mask = symbols.iter().fold(0u8, |m, s| m | s.bit());
        self.comps.get(&mask)
    }

    fn insert_add(&mut self, mask: u8, f: GridFunction) -> Result<()> {
        match self.comps.get_mut(&mask) {
            Some(existing) => *existing = existing.add(&f)?,
            None => {
                self.comps.insert(mask, f);
            }
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(alloc::format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.m != other.m {
            return Err(Error::DimMismatch(alloc::format!("matrix dims {} vs {}", self.m, other.m)));
        }
        let mut out = self.clone();
        for (&k, v) in &other.comps {
            out.insert_add(k, v.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            m: self.m,
            comps: self.comps.iter().map(|(&k, v)| (k, v.scale(s))).collect(),
        }
    }

    /// keep only the components of total degree `k`
    pub fn degree_part(&self, k: usize) -> Self {
        Self {
            dims: self.dims.clone(),
            m: self.m,
            comps: self.comps.iter().filter(|(&mk, _)| mk.count_ones() as usize == k).map(|(&mk, v)| (mk, v.clone())).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.values().map(GridFunction::sup_norm).fold(0.0, f64::max)
    }

    /// sup norm of the difference, componentwise
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// exterior derivative along the torus coordinates
    pub fn d_exterior(&self) -> Result<Self> {
        let mut out = Self { dims: self.dims.clone(), m: self.m, comps: BTreeMap::new() };
        for (&mask, f) in &self.comps {
            for axis in 0..self.dims.len() {
                let bit = 1u8 << (axis + 1);
                if mask & bit != 0 {
                    continue;
                }
                let df = spectral_derivative(f, axis)?;
                let sign = insertion_sign(mask, bit);
                out.insert_add(mask | bit, df.scale(C64::new(sign, 0.0)))?;
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let m = if self.m == 1 { other.m } else { self.m };
        let mut out = Self { dims: self.dims.clone(), m, comps: BTreeMap::new() };
        for (&a, f) in &self.comps {
            for (&b, g) in &other.comps {
                if a & b != 0 {
                    continue;
                }
                let prod = f.mul(g)?;
                let sign = merge_sign(a, b);
                out.insert_add(a | b, prod.scale(C64::new(sign, 0.0)))?;
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            m: 1,
            comps: self.comps.iter().map(|(&k, v)| (k, v.trace())).collect(),
        }
    }

    /// integral of the top-degree torus component (no `ds`) of a scalar form
    pub fn integrate(&self) -> Result<C64> {
        if self.m != 1 {
            return Err(Error::DimMismatch(alloc::format!("integrating a {}x{} matrix form", self.m, self.m)));
        }
        let top: u8 = ((1u16 << (self.dims.len() + 1)) - 2) as u8;
        Ok(self.comps.get(&top).map_or(ZERO, |f| f.mean()[0]))
    }

    /// integration along the first coordinate, with the convention
    /// `π_*(dθ ∧ β) = (∫ dθ) β`
    pub fn pushforward_circle(&self) -> Result<Self> {
        if self.dims.len() < 2 {
            return Err(Error::InvalidParameter("pushforward needs a torus of dimension at least 2".into()));
        }
        let theta = 1u8 << 1;
        let base: Vec<usize> = self.dims[1..].to_vec();
        let mut out = Self { dims: base.clone(), m: self.m, comps: BTreeMap::new() };
        let block = self.m * self.m;
        let n0 = self.dims[0];
        let rest: usize = base.iter().product();
        for (&mask, f) in &self.comps {
            if mask & theta == 0 {
                continue;
            }
            let sign = insertion_sign(mask, theta);
            let mut values = vec![ZERO; rest * block];
            for i0 in 0..n0 {
                let src = &f.values[i0 * rest * block..(i0 + 1) * rest * block];
                for (v, s) in values.iter_mut().zip(src) {
                    *v += s;
                }
            }
            let scale = sign / n0 as f64;
            values.iter_mut().for_each(|v| *v *= scale);
            let new_mask = (mask & S_BIT) | ((torus_bits(mask) & !theta) >> 1);
            out.insert_add(new_mask, GridFunction::new(&base, self.m, values)?)?;
        }
        Ok(out)
    }

    /// pull back along the projection `S¹ × T^d → T^d`, adding a fiber
    /// circle with `n_theta` points in front
    pub fn pullback_from_base(&self, n_theta: usize) -> Result<Self> {
        let mut dims = vec![n_theta];
        dims.extend_from_slice(&self.dims);
        check_dims(&dims)?;
        let mut out = Self { dims: dims.clone(), m: self.m, comps: BTreeMap::new() };
        for (&mask, f) in &self.comps {
            let new_mask = (mask & S_BIT) | (torus_bits(mask) << 1);
            let mut values = Vec::with_capacity(n_theta * f.values.len());
            for _ in 0..n_theta {
                values.extend_from_slice(&f.values);
            }
            out.comps.insert(new_mask, GridFunction::new(&dims, self.m, values)?);
        }
        Ok(out)
    }

    /// `ds ∧ self`
    pub fn ds_wedge(&self) -> Result<Self> {
        let mut out = Self { dims: self.dims.clone(), m: self.m, comps: BTreeMap::new() };
        for (&mask, f) in &self.comps {
            if mask & S_BIT != 0 {
                continue;
            }
            out.comps.insert(mask | S_BIT, f.clone());
        }
        Ok(out)
    }

    /// coefficient form of `ds`: the `β` in `self = α + ds ∧ β`
    pub fn ds_coefficient(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            m: self.m,
            comps: self.comps.iter().filter(|(&k, _)| k & S_BIT != 0).map(|(&k, v)| (k & !S_BIT, v.clone())).collect(),
        }
    }

    /// drop components whose sup norm is below `tol`
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            m: self.m,
            comps: self.comps.iter().filter(|(_, v)| v.sup_norm() > tol).map(|(&k, v)| (k, v.clone())).collect(),
        }
    }

    pub(crate) fn raw_components(&self) -> &BTreeMap<u8, GridFunction> {
        &self.comps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{I, ONE};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn derivative_of_fourier_mode_is_exact() {
        let f = GridFunction::scalar(&[64], |x| (I * 2.0 * PI * x[0]).exp()).unwrap();
        let df = spectral_derivative(&f, 0).unwrap();
        let want = GridFunction::scalar(&[64], |x| I * 2.0 * PI * (I * 2.0 * PI * x[0]).exp()).unwrap();
        assert!(df.max_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = GridFunction::constant(&[16, 8], 2, &linalg::identity_block(2)).unwrap();
        assert!(spectral_derivative(&f, 1).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(GridFunction::scalar(&[7], |_| ONE).is_err());
        assert!(GridFunction::scalar(&[6], |_| ONE).is_err());
        assert!(GridFunction::scalar(&[8, 8, 8, 8], |_| ONE).is_err());
        assert!(spectral_derivative(&GridFunction::scalar(&[8], |_| ONE).unwrap(), 1).is_err());
    }

    #[test]
    fn certificate_separates_smooth_from_rough() {
        let smooth = GridFunction::smooth_from_fn(&[64], 1, |x, o| o[0] = c(libm::cos(2.0 * PI * x[0]))).unwrap();
        assert!(!smooth.flagged());
        let rough = GridFunction::smooth_from_fn(&[64], 1, |x, o| o[0] = c(if x[0] < 0.5 { 1.0 } else { 0.0 })).unwrap();
        assert!(rough.flagged());
        // the flag survives differentiation
        assert!(spectral_derivative(&rough, 0).unwrap().flagged());
    }

    #[test]
    fn dtheta_wedge_dtheta_vanishes() {
        let one = GridFunction::scalar(&[16], |_| ONE).unwrap();
        let dth = DifferentialForm::monomial(&[Symbol::X(0)], one).unwrap();
        assert_eq!(dth.wedge(&dth).unwrap().sup_norm(), 0.0);
        assert_eq!(DifferentialForm::monomial(&[Symbol::X(0), Symbol::X(0)], GridFunction::scalar(&[16], |_| ONE).unwrap()), Err(Error::RepeatedIndex));
    }

    #[test]
    fn monomial_sorts_with_sign() {
        let one = GridFunction::scalar(&[8, 8], |_| ONE).unwrap();
        let f = DifferentialForm::monomial(&[Symbol::X(1), Symbol::X(0)], one).unwrap();
        let coef = f.component(&[Symbol::X(0), Symbol::X(1)]).unwrap();
        assert_eq!(coef.values()[0], c(-1.0));
    }

    #[test]
    fn d_of_scalar_on_circle() {
        let f = GridFunction::scalar(&[32], |x| c(libm::sin(2.0 * PI * x[0]))).unwrap();
        let df = DifferentialForm::from_function(f).d_exterior().unwrap();
        let want = GridFunction::scalar(&[32], |x| c(2.0 * PI * libm::cos(2.0 * PI * x[0]))).unwrap();
        assert!(df.component(&[Symbol::X(0)]).unwrap().max_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn d_of_x_dy_representative() {
        // periodic stand-in for x dy: sin(2πx) dy, so d = 2π cos(2πx) dx∧dy
        let f = GridFunction::scalar(&[16, 16], |x| c(libm::sin(2.0 * PI * x[0]))).unwrap();
        let w = DifferentialForm::monomial(&[Symbol::X(1)], f).unwrap();
        let dw = w.d_exterior().unwrap();
        let want = GridFunction::scalar(&[16, 16], |x| c(2.0 * PI * libm::cos(2.0 * PI * x[0]))).unwrap();
        assert!(dw.component(&[Symbol::X(0), Symbol::X(1)]).unwrap().max_diff(&want).unwrap() < 1e-12);
        assert!(dw.component(&[Symbol::X(1)]).is_none());
    }

    #[test]
    fn d_of_constant_one_form_vanishes() {
        let f = GridFunction::scalar(&[16, 8], |_| c(3.0)).unwrap();
        let w = DifferentialForm::monomial(&[Symbol::X(0)], f).unwrap();
        assert!(w.d_exterior().unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn integrate_constant_area_form() {
        let f = GridFunction::scalar(&[8, 8], |_| ONE).unwrap();
        let w = DifferentialForm::monomial(&[Symbol::X(0), Symbol::X(1)], f).unwrap();
        assert!((w.integrate().unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let f = GridFunction::scalar(&[32], |x| c(libm::sin(2.0 * PI * x[0]) + libm::sin(6.0 * PI * x[0]))).unwrap();
        let w = DifferentialForm::monomial(&[Symbol::X(0)], f).unwrap();
        assert!(w.integrate().unwrap().norm() < 1e-12);
    }

    #[test]
    fn winding_integral() {
        for n in -3i32..=3 {
            let u = GridFunction::scalar(&[64], |x| (I * 2.0 * PI * n as f64 * x[0]).exp()).unwrap();
            let du = DifferentialForm::from_function(u.clone()).d_exterior().unwrap();
            let w = DifferentialForm::from_function(u.adjoint()).wedge(&du).unwrap().scale(1.0 / (2.0 * PI * I));
            assert!((w.trace().integrate().unwrap() - c(n as f64)).norm() < 1e-10);
        }
    }

    #[test]
    fn pushforward_of_product() {
        let h = GridFunction::scalar(&[16, 8], |x| c(1.0 + libm::cos(2.0 * PI * x[0]) + 0.5 * libm::sin(2.0 * PI * x[1]))).unwrap();
        let w = DifferentialForm::monomial(&[Symbol::X(0), Symbol::X(1)], h).unwrap();
        let p = w.pushforward_circle().unwrap();
        let want = GridFunction::scalar(&[8], |x| c(1.0 + 0.5 * libm::sin(2.0 * PI * x[0]))).unwrap();
        assert!(p.component(&[Symbol::X(0)]).unwrap().max_diff(&want).unwrap() < 1e-14);
        // no dθ component → nothing survives
        let g = GridFunction::scalar(&[16, 8], |_| ONE).unwrap();
        let v = DifferentialForm::monomial(&[Symbol::X(1)], g).unwrap();
        assert_eq!(v.pushforward_circle().unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn ds_before_fiber_changes_sign() {
        let h = GridFunction::scalar(&[8, 8], |_| ONE).unwrap();
        let w = DifferentialForm::monomial(&[Symbol::S, Symbol::X(0)], h).unwrap();
        let p = w.pushforward_circle().unwrap();
        assert_eq!(p.component(&[Symbol::S]).unwrap().values()[0], c(-1.0));
    }
}
