//! dense helpers: row-major small blocks for pointwise work, faer for the rest

use alloc::vec;
use alloc::vec::Vec;
use faer::Side;

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type Mat = faer::Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `out = a * b` for row-major n×n blocks
pub fn mul_into(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
}

/// `out += s * a * b`
pub fn mul_acc(a: &[C64], b: &[C64], s: C64, out: &mut [C64], n: usize) {
    for i in 0..n {
        for k in 0..n {
            let aik = s * a[i * n + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
}

pub fn mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    mul_into(a, b, &mut out, n);
    out
}

pub fn adjoint_block(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

pub fn trace_block(a: &[C64], n: usize) -> C64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

pub fn identity_block(n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        out[i * n + i] = ONE;
    }
    out
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_slice(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn block_to_mat(a: &[C64], n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| a[i * n + j])
}

pub fn mat_to_block(m: &Mat) -> Vec<C64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn adjoint(m: &Mat) -> Mat {
    m.adjoint().to_owned()
}

pub fn max_abs(m: &Mat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn max_abs_mat_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

/// max |H - H*|
pub fn hermitian_residual(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

pub fn symmetrize(m: &Mat) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn eye(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// eigenvalues (ascending) and eigenvectors of a Hermitian matrix
pub fn eigh(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    let e = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigensolver)?;
    let s = e.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigvalsh(m: &Mat) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigensolver)
}

/// `exp(iH)` for Hermitian `H`
pub fn exp_i(h: &Mat) -> Result<Mat> {
    let (vals, v) = eigh(h)?;
    let n = h.nrows();
    let mut scaled = v.clone();
    for j in 0..n {
        let ph = C64::new(libm::cos(vals[j]), libm::sin(vals[j]));
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    Ok(&scaled * v.adjoint())
}

/// `max |U*U - I|`
pub fn unitarity_residual(u: &Mat) -> f64 {
    max_abs_mat_diff(&(u.adjoint() * u), &eye(u.nrows()))
}

/// `max(|P² - P|, |P - P*|)`
pub fn projection_residual(p: &Mat) -> f64 {
    max_abs_mat_diff(&(p * p), p).max(hermitian_residual(p))
}

/// orthonormal basis of the eigenspace of a Hermitian near-projection with
/// eigenvalues above 1/2; also returns the eigenvalue closest to 1/2
pub fn range_basis(p: &Mat) -> Result<(Mat, f64)> {
    let (vals, v) = eigh(p)?;
    let mut worst = 0.0f64;
    let mut worst_dist = f64::INFINITY;
    for &l in &vals {
        let d = (l - 0.5).abs();
        if d < worst_dist {
            worst_dist = d;
            worst = l;
        }
    }
    let cols: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
    let basis = Mat::from_fn(p.nrows(), cols.len(), |i, j| v[(i, cols[j])]);
    Ok((basis, worst))
}

/// Gauss–Legendre nodes and weights on [0, 1]
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..n {
        let mut z = libm::cos(pi * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// orthonormal shifted Legendre polynomials `√(2i+1) P_i(2x-1)` for i ≤ deg
pub fn legendre_orthonormal(deg: usize, x: f64) -> Vec<f64> {
    let z = 2.0 * x - 1.0;
    let mut p = vec![0.0; deg + 1];
    p[0] = 1.0;
    if deg >= 1 {
        p[1] = z;
    }
    for k in 2..=deg {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * z * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    for (k, v) in p.iter_mut().enumerate() {
        *v *= libm::sqrt(2.0 * k as f64 + 1.0);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        for deg in 0..23 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, deg as f64)).sum();
            assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}: {q}");
        }
    }

    #[test]
    fn legendre_basis_is_orthonormal() {
        let (x, w) = gauss_legendre(40);
        let vals: Vec<Vec<f64>> = x.iter().map(|&x| legendre_orthonormal(30, x)).collect();
        for i in 0..=30 {
            for j in 0..=30 {
                let g: f64 = vals.iter().zip(&w).map(|(v, w)| w * v[i] * v[j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_i_of_hermitian_is_unitary() {
        let h = Mat::from_fn(3, 3, |i, j| {
            let z = C64::new((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.2);
            if i == j { C64::new(z.re, 0.0) } else if i < j { z } else { C64::new((j + 2 * i) as f64 * 0.3, (j as f64 - i as f64) * 0.2).conj() }
        });
        let h = symmetrize(&h);
        let u = exp_i(&h).unwrap();
        assert!(unitarity_residual(&u) < 1e-13);
    }
}
