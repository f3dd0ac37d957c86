//! Concrete families used by the suites: projection paths on the circle,
//! unitary paths on the 2-torus and their product operators.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Result;
use crate::fourier_fn::GridFunction;
use crate::ktheory::{loop_unitary_block, BumpProfile, ProjectionPath, UnitaryPath};
use crate::linalg::{self, Mat, C64, I, ONE, ZERO};
use crate::models::{ModelRng, TrigHermitian};
use crate::operators::{self, DiscreteOperator, Provenance};

/// `p_s = u_s v v* u_s*` on the circle with `v = (cos a, e^{iβ} sin a)` and
/// `u_s = diag(e^{2πisq}, 1)`; `a`, `β`, `q` are random trigonometric
/// polynomials
#[derive(Debug, Clone)]
pub struct CirclePath {
    a: TrigHermitian,
    beta: TrigHermitian,
    q: TrigHermitian,
}

impl CirclePath {
    pub fn random(rng: &mut ModelRng, degree: usize) -> Self {
        Self {
            a: TrigHermitian::random(rng, 1, 1, degree, 2.0),
            beta: TrigHermitian::random(rng, 1, 1, degree, 2.0),
            q: TrigHermitian::random(rng, 1, 1, degree, 0.6),
        }
    }

    /// the unit section `u_s v` spanning the range of `p_s`
    pub fn frame(&self, s: f64, theta: f64) -> [C64; 2] {
        let x = [theta];
        let (a, b, q) = (self.a.scalar(&x), self.beta.scalar(&x), self.q.scalar(&x));
        [(I * 2.0 * PI * s * q).exp() * libm::cos(a), (I * b).exp() * libm::sin(a)]
    }

    pub fn projection(&self, s: f64, theta: f64) -> [C64; 4] {
        let w = self.frame(s, theta);
        [w[0] * w[0].conj(), w[0] * w[1].conj(), w[1] * w[0].conj(), w[1] * w[1].conj()]
    }

    pub fn projection_path(&self, n_theta: usize, n_s: usize) -> Result<ProjectionPath> {
        let nodes = (0..n_s)
            .map(|i| {
                let s = i as f64 / (n_s - 1) as f64;
                GridFunction::from_fn(&[n_theta], 2, |x, out| out.copy_from_slice(&self.projection(s, x[0])))
            })
            .collect::<Result<Vec<_>>>()?;
        ProjectionPath::new(nodes)
    }

    /// holonomy `φ(s) = (1/2π)∫ −i⟨σ, σ'⟩ dθ` of the section `σ = u_s v`,
    /// by the trapezoidal rule (exact for these trigonometric data up to
    /// aliasing)
    pub fn holonomy(&self, s: f64, n: usize) -> f64 {
        (0..n)
            .map(|j| {
                let x = [j as f64 / n as f64];
                let a = self.a.scalar(&x);
                let (c2, s2) = (libm::pow(libm::cos(a), 2.0), libm::pow(libm::sin(a), 2.0));
                self.beta.scalar_derivative(&x, 0) * s2 + 2.0 * PI * s * self.q.scalar_derivative(&x, 0) * c2
            })
            .sum::<f64>()
            / (n as f64 * 2.0 * PI)
    }

    /// `p_s (σD) p_s` with `D = −i d/dθ` and orientation `σ = ±1`, in the
    /// frame `u_s v`, on the odd collocation grid with cutoff `k`
    pub fn operator(&self, s: f64, k: usize, orientation: f64) -> Result<DiscreteOperator> {
        let m = operators::circle_nodes(k);
        let frames: Vec<Mat> = (0..m)
            .map(|j| {
                let w = self.frame(s, j as f64 / m as f64);
                Mat::from_fn(2, 1, |i, _| w[i])
            })
            .collect();
        let c = Mat::from_fn(1, 1, |_, _| -I * orientation);
        let prov = Provenance::new("circle_projection_path", &[m], "collocation nodes in the frame u_s v").with("s", s).with("orientation", orientation);
        operators::frame_dirac(&[m], &[c], &frames, prov)
    }
}

/// two-band Chern insulator (QWZ) rank-one projection `P = (I + d̂·σ)/2` on the 2-torus,
/// `d = (sin 2πx, sin 2πy, mass − cos 2πx − cos 2πy)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QwzProjection {
    pub mass: f64,
}

impl QwzProjection {
    pub fn eval(&self, x: f64, y: f64) -> [C64; 4] {
        let (sx, sy) = (libm::sin(2.0 * PI * x), libm::sin(2.0 * PI * y));
        let dz = self.mass - libm::cos(2.0 * PI * x) - libm::cos(2.0 * PI * y);
        let r = libm::sqrt(sx * sx + sy * sy + dz * dz);
        let (nx, ny, nz) = (sx / r, sy / r, dz / r);
        [
            C64::new(0.5 * (1.0 + nz), 0.0),
            C64::new(0.5 * nx, -0.5 * ny),
            C64::new(0.5 * nx, 0.5 * ny),
            C64::new(0.5 * (1.0 - nz), 0.0),
        ]
    }

    pub fn grid(&self, n: usize) -> Result<GridFunction> {
        GridFunction::from_fn(&[n, n], 2, |x, out| out.copy_from_slice(&self.eval(x[0], x[1])))
    }
}

/// `U_s = exp(2πisκP) = I + (e^{2πisκ} − 1)P` on the 2-torus
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPath {
    pub projection: QwzProjection,
    pub kappa: f64,
}

impl TorusPath {
    pub fn unitary(&self, s: f64, x: f64, y: f64) -> [C64; 4] {
        let p = self.projection.eval(x, y);
        let z = (I * 2.0 * PI * s * self.kappa).exp() - ONE;
        [ONE + z * p[0], z * p[1], z * p[2], ONE + z * p[3]]
    }

    pub fn unitary_path(&self, n: usize, n_s: usize) -> Result<UnitaryPath> {
        let nodes = (0..n_s)
            .map(|i| {
                let s = i as f64 / (n_s - 1) as f64;
                GridFunction::from_fn(&[n, n], 2, |x, out| out.copy_from_slice(&self.unitary(s, x[0], x[1])))
            })
            .collect::<Result<Vec<_>>>()?;
        UnitaryPath::new(nodes)
    }

    /// `(sin 2πκ / 2π − κ)` times the Chern number of `P`
    pub fn expected_tch_factor(&self) -> f64 {
        libm::sin(2.0 * PI * self.kappa) / (2.0 * PI) - self.kappa
    }

    /// `e_{U_s} D e_{U_s}` for the flat Dirac operator of the 3-torus
    /// `S¹ × T²` (two-component spinors), on odd collocation grids with
    /// `m_theta` nodes along the circle and cutoff `k` on the torus. The
    /// range of `e_U` is trivialized by the periodic frame
    /// `𝒰 (I, 0)ᵀ exp(−iθ 2πsκP)`.
    pub fn operator(&self, s: f64, k: usize, m_theta: usize, profile: &BumpProfile) -> Result<DiscreteOperator> {
        let m = operators::circle_nodes(k);
        // c_θ = iσ_z, c_x = iσ_y, c_y = −iσ_x
        let spin = [
            Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { I } else { -I }),
            Mat::from_fn(2, 2, |i, j| if i == j { ZERO } else if i == 0 { ONE } else { -ONE }),
            Mat::from_fn(2, 2, |i, j| if i == j { ZERO } else { -I }),
        ];
        let mut frames = Vec::with_capacity(m_theta * m * m);
        for jt in 0..m_theta {
            let theta = jt as f64 / m_theta as f64;
            let b = profile.eval(theta);
            for jx in 0..m {
                for jy in 0..m {
                    let (x, y) = (jx as f64 / m as f64, jy as f64 / m as f64);
                    let u = self.unitary(s, x, y);
                    let w = linalg::block_to_mat(&loop_unitary_block(&u, 2, &b), 4);
                    let p = linalg::block_to_mat(&self.projection.eval(x, y), 2);
                    let phase = -2.0 * PI * s * self.kappa * theta;
                    let z = (I * phase).exp() - ONE;
                    let g = Mat::from_fn(2, 2, |i, j| if i == j { ONE } else { ZERO } + p[(i, j)] * z);
                    frames.push(w.as_ref().submatrix(0, 0, 4, 2) * &g);
                }
            }
        }
        let prov = Provenance::new("torus_cup_frame", &[m_theta, m, m], "collocation nodes ⊗ C² spinors ⊗ periodic frame of e_U")
            .with("s", s)
            .with("cutoff", k as f64)
            .with("kappa", self.kappa);
        operators::frame_dirac(&[m_theta, m, m], &spin, &frames, prov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ktheory::{chern_even, tch_projection, tch_unitary, K_MAX};
    use crate::spectral::{self, FlowOptions};

    #[test]
    fn qwz_has_unit_chern_number() {
        let p = QwzProjection { mass: 1.0 }.grid(64).unwrap();
        let c = chern_even(&p, K_MAX).unwrap().integrate().unwrap();
        assert!((c.re.abs() - 1.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn torus_transgression_matches_closed_form() {
        let path = TorusPath { projection: QwzProjection { mass: 1.0 }, kappa: 0.5 };
        let rhs = tch_unitary(&path.unitary_path(24, 17).unwrap(), K_MAX).unwrap().integrate().unwrap();
        assert!((rhs.re - path.expected_tch_factor()).abs() < 1e-4, "{rhs}");
    }

    #[test]
    fn circle_projection_path_stays_projective() {
        let path = CirclePath::random(&mut ModelRng::seeded(4), 2);
        let pp = path.projection_path(32, 5).unwrap();
        assert!(pp.path().nodes().iter().all(|p| p.max_projection_residual() < 1e-12));
        let op = path.operator(0.0, 16, 1.0).unwrap();
        assert!(linalg::hermitian_residual(op.matrix()) < 1e-10);
    }

    #[test]
    fn circle_xi_difference_at_coarse_cutoff() {
        let path = CirclePath::random(&mut ModelRng::seeded(1), 2);
        let rhs = tch_projection(&path.projection_path(64, 33).unwrap(), K_MAX).unwrap().integrate().unwrap().re;
        let xi = |s: f64| spectral::eta_default(&spectral::eigenvalues(&path.operator(s, 32, 1.0).unwrap()).unwrap());
        let grid: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let f = spectral::spectral_flow(|s| spectral::sorted_eigenvalues(&path.operator(s, 32, 1.0)?), &grid, &FlowOptions::default()).unwrap();
        let rep = spectral::xi_difference_identity(&xi(0.0), &xi(1.0), &f, rhs).unwrap();
        assert!(rep.residual < 2e-3, "{rep:?}");
    }
}
