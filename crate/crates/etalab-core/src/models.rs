//! Seeded random matrices, unitaries on tori and unitary paths.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::fourier_fn::{grid_coords, GridFunction};
use crate::ktheory::UnitaryPath;
use crate::linalg::{self, Mat, C64, I, ZERO};

/// reproducible source of random models
#[derive(Debug, Clone)]
pub struct ModelRng(ChaCha8Rng);

impl ModelRng {
    pub fn seeded(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// standard complex Gaussian, `E|z|² = 1`
    pub fn complex(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * core::f64::consts::FRAC_1_SQRT_2
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.gen::<f64>()
    }
}

pub fn random_complex(rng: &mut ModelRng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.complex())
}

/// GUE-type Hermitian matrix with spectrum of order `scale`
pub fn random_hermitian(rng: &mut ModelRng, n: usize, scale: f64) -> Mat {
    let x = random_complex(rng, n, n);
    let s = scale / libm::sqrt(2.0 * n as f64);
    Mat::from_fn(n, n, |i, j| (x[(i, j)] + x[(j, i)].conj()) * s)
}

pub fn random_unitary(rng: &mut ModelRng, n: usize, scale: f64) -> Result<Mat> {
    linalg::exp_i(&random_hermitian(rng, n, scale))
}

/// Hermitian trigonometric polynomial `H(x) = Σ_k C_k e^{2πik·x} + h.c.`
/// with `|k_i| ≤ degree`, coefficients decaying like `amplitude / (1 + |k|²)`
#[derive(Debug, Clone)]
pub struct TrigHermitian {
    n: usize,
    modes: Vec<(Vec<i64>, Vec<C64>)>,
}

impl TrigHermitian {
    pub fn random(rng: &mut ModelRng, dim: usize, n: usize, degree: usize, amplitude: f64) -> Self {
        let side = 2 * degree + 1;
        let count = side.pow(dim as u32);
        let modes = (0..count)
            .map(|c| {
                let k: Vec<i64> = (0..dim).map(|a| ((c / side.pow(a as u32)) % side) as i64 - degree as i64).collect();
                let k2: i64 = k.iter().map(|v| v * v).sum();
                let s = amplitude / (1.0 + k2 as f64) / (2.0 * n as f64);
                let coef = (0..n * n).map(|_| rng.complex() * s).collect();
                (k, coef)
            })
            .collect();
        Self { n, modes }
    }

    pub fn eval(&self, x: &[f64], out: &mut [C64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = ZERO);
        for (k, coef) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            let e = (I * 2.0 * PI * phase).exp();
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += coef[i * n + j] * e + (coef[j * n + i] * e).conj();
                }
            }
        }
    }

    /// `∂H/∂x_axis`
    pub fn eval_derivative(&self, x: &[f64], axis: usize, out: &mut [C64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = ZERO);
        for (k, coef) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            let e = (I * 2.0 * PI * phase).exp() * (I * 2.0 * PI * k[axis] as f64);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += coef[i * n + j] * e + (coef[j * n + i] * e).conj();
                }
            }
        }
    }

    /// value of a scalar (`1 × 1`) generator
    pub fn scalar(&self, x: &[f64]) -> f64 {
        let mut out = [ZERO];
        self.eval(x, &mut out);
        out[0].re
    }

    pub fn scalar_derivative(&self, x: &[f64], axis: usize) -> f64 {
        let mut out = [ZERO];
        self.eval_derivative(x, axis, &mut out);
        out[0].re
    }
}

/// `exp(iH)` of a Hermitian block
pub fn exp_i_block(h: &[C64], n: usize) -> Result<Vec<C64>> {
    if n == 1 {
        return Ok(vec![(I * h[0].re).exp()]);
    }
    Ok(linalg::mat_to_block(&linalg::exp_i(&linalg::block_to_mat(h, n))?))
}

/// `exp(iH(x))` sampled on a grid
pub fn unitary_from_generator(dims: &[usize], gens: &[&TrigHermitian], weights: &[f64]) -> Result<GridFunction> {
    let n = gens[0].n;
    let npts: usize = dims.iter().product();
    let mut x = vec![0.0; dims.len()];
    let mut h = vec![ZERO; n * n];
    let mut tmp = vec![ZERO; n * n];
    let mut values = Vec::with_capacity(npts * n * n);
    for p in 0..npts {
        grid_coords(dims, p, &mut x);
        h.iter_mut().for_each(|v| *v = ZERO);
        for (g, &w) in gens.iter().zip(weights) {
            g.eval(&x, &mut tmp);
            h.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b * w);
        }
        values.extend(exp_i_block(&h, n)?);
    }
    GridFunction::new(dims, n, values)
}

/// smooth random unitary `exp(iH(x))` on a torus
pub fn random_torus_unitary(rng: &mut ModelRng, dims: &[usize], n: usize, degree: usize, amplitude: f64) -> Result<GridFunction> {
    let h = TrigHermitian::random(rng, dims.len(), n, degree, amplitude);
    unitary_from_generator(dims, &[&h], &[1.0])
}

/// `e^{2πi w x₀}` on a torus, as a 1×1 unitary
pub fn winding_unitary(dims: &[usize], w: i64) -> Result<GridFunction> {
    GridFunction::scalar(dims, |x| (I * 2.0 * PI * w as f64 * x[0]).exp())
}

/// `U_s(x) = W(x) exp(i(H₀(x) + s H₁(x)))` with `W` an optional winding factor
pub fn random_unitary_path(
    rng: &mut ModelRng,
    dims: &[usize],
    n: usize,
    n_s: usize,
    degree: usize,
    amplitude: f64,
) -> Result<UnitaryPath> {
    let h0 = TrigHermitian::random(rng, dims.len(), n, degree, amplitude);
    let h1 = TrigHermitian::random(rng, dims.len(), n, degree, amplitude);
    let nodes = (0..n_s)
        .map(|i| {
            let s = if n_s == 1 { 0.0 } else { i as f64 / (n_s - 1) as f64 };
            unitary_from_generator(dims, &[&h0, &h1], &[1.0, s])
        })
        .collect::<Result<Vec<_>>>()?;
    UnitaryPath::new(nodes)
}
