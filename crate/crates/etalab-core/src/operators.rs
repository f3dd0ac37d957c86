//! Matrix models of Dirac-type operators: collocation operators on tori
//! (circle and product), their compressions by projections, and the interval
//! operator with boundary projections, discretized by Legendre–Galerkin.
//!
//! A boundary model replaces `(∂M, D^∂)` by a graded Hermitian pair `(A, γ)`
//! on `C^m`, with coefficients in `C^n`; operators act on `C^m ⊗ C^n`
//! (spinor index major). The Clifford element is `c = iγ ⊗ I_n`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ktheory::{loop_unitary_block, BumpProfile};
use crate::linalg::{self, Mat, C64, I, ONE, ZERO};
use crate::models::{self, ModelRng};

/// relative tolerance for the Hermitian contract of assembled operators
pub const HERMITIAN_TOL: f64 = 1e-12;

/// eigenvalues of a discrete projection inside this band signal aliasing
pub const ALIASING_BAND: (f64, f64) = (0.1, 0.9);

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBoundary {
    m: usize,
    n: usize,
    a: Mat,
    gamma: Mat,
    lagrangian: Option<Mat>,
}

fn kernel_basis(a: &Mat) -> Result<(Vec<f64>, Mat, Vec<usize>)> {
    let (vals, v) = linalg::eigh(a)?;
    let scale = vals.iter().fold(1.0f64, |s, l| s.max(l.abs()));
    let ker = (0..vals.len()).filter(|&k| vals[k].abs() < 1e-10 * scale).collect();
    Ok((vals, v, ker))
}

impl ModelBoundary {
    pub fn new(a: Mat, gamma: Mat, lagrangian: Option<Mat>, n: usize) -> Result<Self> {
        let m = a.nrows();
        if m == 0 || m % 2 == 1 || a.ncols() != m || gamma.nrows() != m || gamma.ncols() != m || n == 0 {
            return Err(Error::InvalidModel(alloc::format!("need even m and square m×m data, got m = {m}")));
        }
        let scale = linalg::max_abs(&a).max(1.0);
        let r = linalg::hermitian_residual(&a) / scale;
        if r > HERMITIAN_TOL {
            return Err(Error::NotHermitian(r));
        }
        let g2 = linalg::max_abs_mat_diff(&(&gamma * &gamma), &linalg::eye(m)).max(linalg::hermitian_residual(&gamma));
        if g2 > 1e-12 {
            return Err(Error::InvalidModel(alloc::format!("grading is not a Hermitian involution ({g2:.2e})")));
        }
        let anti = linalg::max_abs(&(&(&gamma * &a) + &(&a * &gamma))) / scale;
        if anti > 1e-12 {
            return Err(Error::InvalidModel(alloc::format!("A does not anticommute with the grading ({anti:.2e})")));
        }
        let (_, _, ker) = kernel_basis(&a)?;
        match (&lagrangian, ker.len()) {
            (None, 0) => {}
            (None, k) => return Err(Error::MissingLagrangian(k)),
            (Some(l), k) => {
                if 2 * l.ncols() != k || l.nrows() != m {
                    return Err(Error::InvalidModel(alloc::format!("lagrangian of dimension {} in a {k}-dimensional kernel", l.ncols())));
                }
                let c = Mat::from_fn(m, m, |i, j| gamma[(i, j)] * I);
                let ortho = linalg::max_abs_mat_diff(&(l.adjoint() * l), &linalg::eye(l.ncols()));
                let in_ker = linalg::max_abs(&(&a * l)) / scale;
                let iso = linalg::max_abs(&(l.adjoint() * (&c * l)));
                let r = ortho.max(in_ker).max(iso);
                if r > 1e-10 {
                    return Err(Error::InvalidModel(alloc::format!("subspace is not lagrangian (residual {r:.2e})")));
                }
            }
        }
        Ok(Self { m, n, a, gamma, lagrangian })
    }

    /// `γ = diag(I, −I)`, `A = [[0, B], [B*, 0]]` with `B` complex Gaussian
    pub fn random(rng: &mut ModelRng, m: usize, n: usize, scale: f64) -> Result<Self> {
        let h = m / 2;
        let b = models::random_complex(rng, h, h);
        let b = Mat::from_fn(h, h, |i, j| b[(i, j)] * scale);
        Self::from_offdiagonal(&b, n)
    }

    /// as [`ModelBoundary::random`] with `B` of rank `m/2 − kernel_pairs`
    /// and the Lagrangian `span{(v₊ + v₋)/√2}` built from `ker B*` and `ker B`
    pub fn random_with_kernel(rng: &mut ModelRng, m: usize, n: usize, kernel_pairs: usize, scale: f64) -> Result<Self> {
        let h = m / 2;
        let r = h.saturating_sub(kernel_pairs);
        let x = models::random_complex(rng, h, r);
        let y = models::random_complex(rng, h, r);
        let b = &x * y.adjoint();
        let b = Mat::from_fn(h, h, |i, j| b[(i, j)] * scale);
        Self::from_offdiagonal(&b, n)
    }

    fn from_offdiagonal(b: &Mat, n: usize) -> Result<Self> {
        let h = b.nrows();
        let m = 2 * h;
        let a = Mat::from_fn(m, m, |i, j| match (i < h, j < h) {
            (true, false) => b[(i, j - h)],
            (false, true) => b[(j, i - h)].conj(),
            _ => ZERO,
        });
        let gamma = Mat::from_fn(m, m, |i, j| if i != j { ZERO } else if i < h { ONE } else { -ONE });
        let (_, kb, ker) = kernel_basis(&a)?;
        let lagrangian = if ker.is_empty() {
            None
        } else {
            // kernel of A splits into ker B* (upper) ⊕ ker B (lower)
            let upper = orthonormal_part(&kb, &ker, 0, h);
            let lower = orthonormal_part(&kb, &ker, h, h);
            let k = upper.ncols().min(lower.ncols());
            let s = core::f64::consts::FRAC_1_SQRT_2;
            Some(Mat::from_fn(m, k, |i, j| if i < h { upper[(i, j)] * s } else { lower[(i - h, j)] * s }))
        };
        Self::new(a, gamma, lagrangian, n)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// dimension `m·n` of the fibre `C^m ⊗ C^n`
    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    pub fn lagrangian(&self) -> Option<&Mat> {
        self.lagrangian.as_ref()
    }

    /// `A ⊗ I_n`
    pub fn a_full(&self) -> Mat {
        linalg::kron(&self.a, &linalg::eye(self.n))
    }

    /// `c = iγ ⊗ I_n`
    pub fn clifford(&self) -> Mat {
        let g = linalg::kron(&self.gamma, &linalg::eye(self.n));
        Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * I)
    }

    /// orthonormal bases of the `±1` eigenspaces of `γ ⊗ I_n`
    pub fn grading_blocks(&self) -> Result<(Mat, Mat)> {
        let g = linalg::kron(&self.gamma, &linalg::eye(self.n));
        let (vals, v) = linalg::eigh(&g)?;
        let pick = |pos: bool| {
            let cols: Vec<usize> = (0..vals.len()).filter(|&k| (vals[k] > 0.0) == pos).collect();
            Mat::from_fn(v.nrows(), cols.len(), |i, j| v[(i, cols[j])])
        };
        Ok((pick(true), pick(false)))
    }

    /// `exp(iH)` with `H` block-diagonal for the grading, hence commuting with `c`
    pub fn random_unitary(&self, rng: &mut ModelRng, scale: f64) -> Result<Mat> {
        linalg::exp_i(&self.random_generator(rng, scale)?)
    }

    pub fn random_generator(&self, rng: &mut ModelRng, scale: f64) -> Result<Mat> {
        let (qp, qm) = self.grading_blocks()?;
        let hp = models::random_hermitian(rng, qp.ncols(), scale);
        let hm = models::random_hermitian(rng, qm.ncols(), scale);
        Ok(&(&qp * &hp) * qp.adjoint() + &(&qm * &hm) * qm.adjoint())
    }

    /// `‖uc − cu‖` and unitarity, rejecting coefficients the model cannot host
    pub fn check_unitary(&self, u: &Mat) -> Result<()> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimMismatch(alloc::format!("unitary of size {} on a fibre of dimension {}", u.nrows(), self.dim())));
        }
        let r = linalg::unitarity_residual(u);
        if r > 1e-10 {
            return Err(Error::NotUnitary(r));
        }
        let c = self.clifford();
        let comm = linalg::max_abs_mat_diff(&(u * &c), &(&c * u));
        if comm > 1e-10 {
            return Err(Error::InvalidModel(alloc::format!("unitary does not commute with the Clifford element ({comm:.2e})")));
        }
        Ok(())
    }
}

fn orthonormal_part(v: &Mat, cols: &[usize], offset: usize, len: usize) -> Mat {
    // the rows [offset, offset+len) of the kernel vectors span one graded half
    let raw = Mat::from_fn(len, cols.len(), |i, j| v[(offset + i, cols[j])]);
    let g = raw.adjoint() * &raw;
    let (vals, w) = linalg::eigh(&g).expect("small Hermitian eigenproblem");
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-8).collect();
    let mut out = Mat::from_fn(len, keep.len(), |_, _| ZERO);
    for (jj, &k) in keep.iter().enumerate() {
        let s = 1.0 / libm::sqrt(vals[k]);
        for i in 0..len {
            let mut acc = ZERO;
            for l in 0..cols.len() {
                acc += raw[(i, l)] * w[(l, k)];
            }
            out[(i, jj)] = acc * s;
        }
    }
    out
}

/// `P^∂ = P_{>0}(A ⊗ I) + P_L ⊗ I`
pub fn boundary_projection(model: &ModelBoundary) -> Result<Mat> {
    let (vals, v, _) = kernel_basis(&model.a)?;
    let scale = vals.iter().fold(1.0f64, |s, l| s.max(l.abs()));
    let m = model.m;
    let mut p = Mat::from_fn(m, m, |_, _| ZERO);
    for k in (0..m).filter(|&k| vals[k] > 1e-10 * scale) {
        for i in 0..m {
            for j in 0..m {
                p[(i, j)] += v[(i, k)] * v[(j, k)].conj();
            }
        }
    }
    if let Some(l) = &model.lagrangian {
        p += l * l.adjoint();
    }
    Ok(linalg::kron(&p, &linalg::eye(model.n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProjection {
    matrix: Mat,
    t: f64,
}

impl BoundaryProjection {
    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rank(&self) -> usize {
        let n = self.matrix.nrows();
        libm::round((0..n).map(|i| self.matrix[(i, i)].re).sum::<f64>()) as usize
    }
}

/// `P_t^u` on `H^∂ = C^{mn} ⊕ C^{mn}` (values at 0 and at 1)
pub fn build_pt(model: &ModelBoundary, u: &Mat, t: f64) -> Result<BoundaryProjection> {
    model.check_unitary(u)?;
    let p = boundary_projection(model)?;
    let d = model.dim();
    let upu = u.adjoint() * (&p * u);
    let (c, s) = (libm::cos(t), libm::sin(t));
    let (c2, s2, cs) = (c * c, s * s, c * s);
    let matrix = Mat::from_fn(2 * d, 2 * d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        match (i < d, j < d) {
            (true, true) => p[(i, j)] * c2 + (C64::new(id, 0.0) - p[(i, j)]) * s2,
            (true, false) => -u[(i, j - d)] * cs,
            (false, true) => -u[(j, i - d)].conj() * cs,
            (false, false) => {
                let q = upu[(i - d, j - d)];
                (C64::new(id, 0.0) - q) * c2 + q * s2
            }
        }
    });
    Ok(BoundaryProjection { matrix, t })
}

/// the block matrices `τ, γ̃, Ã, μ` on `H^∂`
#[derive(Debug, Clone)]
pub struct ProofBlocks {
    pub tau: Mat,
    pub gamma: Mat,
    pub a: Mat,
    pub mu: Mat,
}

pub fn proof_blocks(model: &ModelBoundary, u: &Mat) -> Result<ProofBlocks> {
    model.check_unitary(u)?;
    let d = model.dim();
    let c = model.clifford();
    let a = model.a_full();
    let uau = u.adjoint() * (&a * u);
    let blocks = |tl: &dyn Fn(usize, usize) -> C64, tr: &dyn Fn(usize, usize) -> C64, bl: &dyn Fn(usize, usize) -> C64, br: &dyn Fn(usize, usize) -> C64| {
        Mat::from_fn(2 * d, 2 * d, |i, j| match (i < d, j < d) {
            (true, true) => tl(i, j),
            (true, false) => tr(i, j - d),
            (false, true) => bl(i - d, j),
            (false, false) => br(i - d, j - d),
        })
    };
    let zero = |_: usize, _: usize| ZERO;
    Ok(ProofBlocks {
        tau: blocks(&zero, &|i, j| u[(i, j)], &|i, j| u[(j, i)].conj(), &zero),
        gamma: blocks(&|i, j| c[(i, j)], &zero, &zero, &|i, j| -c[(i, j)]),
        a: blocks(&|i, j| a[(i, j)], &zero, &zero, &|i, j| -uau[(i, j)]),
        mu: blocks(&zero, &|i, j| u[(i, j)], &|i, j| -u[(j, i)].conj(), &zero),
    })
}

/// residuals of the algebraic identities behind the t-independence of eta
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ProofResiduals {
    pub tau_squared: f64,
    pub tau_hermitian: f64,
    pub tau_a: f64,
    pub tau_gamma: f64,
    pub mu_squared: f64,
    pub mu_unitary: f64,
    pub mu_tau: f64,
    pub mu_gamma: f64,
    pub mu_a: f64,
    pub gamma_pt: f64,
    pub pt_a_squared: f64,
    pub pt_a_pt: f64,
}

impl ProofResiduals {
    pub fn max(&self) -> f64 {
        [
            self.tau_squared,
            self.tau_hermitian,
            self.tau_a,
            self.tau_gamma,
            self.mu_squared,
            self.mu_unitary,
            self.mu_tau,
            self.mu_gamma,
            self.mu_a,
            self.gamma_pt,
            self.pt_a_squared,
            self.pt_a_pt,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn anticomm(a: &Mat, b: &Mat) -> f64 {
    linalg::max_abs(&(a * b + b * a))
}

/// all identities at the listed values of `t`, worst case over `t`
pub fn mu_symmetry_check(model: &ModelBoundary, u: &Mat, ts: &[f64]) -> Result<ProofResiduals> {
    let b = proof_blocks(model, u)?;
    let n = b.tau.nrows();
    let id = linalg::eye(n);
    let minus_id = Mat::from_fn(n, n, |i, j| if i == j { -ONE } else { ZERO });
    let (vals, v) = linalg::eigh(&b.a)?;
    let abs_a = {
        let mut sv = v.clone();
        for j in 0..n {
            for i in 0..n {
                sv[(i, j)] *= vals[j].abs();
            }
        }
        &sv * v.adjoint()
    };
    let a2 = &b.a * &b.a;
    let mut r = ProofResiduals {
        tau_squared: linalg::max_abs_mat_diff(&(&b.tau * &b.tau), &id),
        tau_hermitian: linalg::hermitian_residual(&b.tau),
        tau_a: anticomm(&b.tau, &b.a),
        tau_gamma: anticomm(&b.tau, &b.gamma),
        mu_squared: linalg::max_abs_mat_diff(&(&b.mu * &b.mu), &minus_id),
        mu_unitary: linalg::unitarity_residual(&b.mu),
        mu_tau: anticomm(&b.mu, &b.tau),
        mu_gamma: anticomm(&b.mu, &b.gamma),
        mu_a: anticomm(&b.mu, &b.a),
        ..Default::default()
    };
    for &t in ts {
        let p = build_pt(model, u, t)?;
        let p = p.matrix();
        let comp = &id - p;
        r.gamma_pt = r.gamma_pt.max(linalg::max_abs_mat_diff(&(&b.gamma * p), &(&comp * &b.gamma)));
        r.pt_a_squared = r.pt_a_squared.max(linalg::max_abs_mat_diff(&(p * &a2), &(&a2 * p)));
        let lhs = p * (&b.a * p);
        let rhs = &abs_a * p;
        let c2t = libm::cos(2.0 * t);
        let rhs = Mat::from_fn(n, n, |i, j| rhs[(i, j)] * c2t);
        r.pt_a_pt = r.pt_a_pt.max(linalg::max_abs_mat_diff(&lhs, &rhs));
    }
    Ok(r)
}

/// where an operator came from, enough to rebuild it
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Provenance {
    pub builder: String,
    pub grid: Vec<usize>,
    pub params: Vec<(String, f64)>,
    pub basis: String,
}

impl Provenance {
    pub fn new(builder: &str, grid: &[usize], basis: &str) -> Self {
        Self { builder: builder.into(), grid: grid.to_vec(), params: Vec::new(), basis: basis.into() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }
}

/// a Hermitian matrix together with its provenance
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: Mat,
    provenance: Provenance,
}

impl DiscreteOperator {
    /// checks the Hermitian contract (relative to the entry scale) and
    /// symmetrizes away the roundoff
    pub fn new(matrix: Mat, provenance: Provenance) -> Result<Self> {
        let scale = linalg::max_abs(&matrix).max(1.0);
        let r = linalg::hermitian_residual(&matrix) / scale;
        if r > HERMITIAN_TOL {
            return Err(Error::NotHermitian(r));
        }
        Ok(Self { matrix: linalg::symmetrize(&matrix), provenance })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.matrix)
    }
}

/// `F_ij = π(−1)^{i−j} / sin(π(i−j)/M)`: exact derivative of trigonometric
/// interpolants on `M` (odd) equispaced nodes of the unit circle
pub fn collocation_derivative(m: usize) -> Vec<f64> {
    let mut f = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let d = i as i64 - j as i64;
                let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                f[i * m + j] = PI * sign / libm::sin(PI * d as f64 / m as f64);
            }
        }
    }
    f
}

/// zeroth-order part of a torus operator
#[derive(Debug, Clone)]
pub enum Potential {
    None,
    Constant(Mat),
    PerPoint(Vec<Mat>),
}

/// `Σ_μ ∂_μ ⊗ c_μ + V` on odd collocation grids of a torus; the per-point
/// fibre has dimension `b` and each `c_μ` is a `b × b` anti-Hermitian matrix
#[derive(Debug, Clone)]
pub struct TorusDirac {
    nodes: Vec<usize>,
    clifford: Vec<Mat>,
    potential: Potential,
    derivs: Vec<Vec<f64>>,
}

impl TorusDirac {
    pub fn new(nodes: &[usize], clifford: Vec<Mat>, potential: Potential) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != clifford.len() || nodes.iter().any(|&m| m % 2 == 0 || m < 3) {
            return Err(Error::InvalidParameter(alloc::format!("collocation grid {nodes:?} must be odd, one size per Clifford generator")));
        }
        let b = clifford[0].nrows();
        if clifford.iter().any(|c| c.nrows() != b || c.ncols() != b) {
            return Err(Error::DimMismatch("Clifford generators differ in size".into()));
        }
        let derivs = nodes.iter().map(|&m| collocation_derivative(m)).collect();
        Ok(Self { nodes: nodes.to_vec(), clifford, potential, derivs })
    }

    pub fn npts(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn fibre(&self) -> usize {
        self.clifford[0].nrows()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn potential_at(&self, p: usize) -> Option<&Mat> {
        match &self.potential {
            Potential::None => None,
            Potential::Constant(v) => Some(v),
            Potential::PerPoint(v) => Some(&v[p]),
        }
    }

    fn strides(&self) -> Vec<usize> {
        let d = self.nodes.len();
        let mut s = vec![1; d];
        for a in (0..d - 1).rev() {
            s[a] = s[a + 1] * self.nodes[a + 1];
        }
        s
    }

    /// `W* D W` for per-point frames `W_p` (`b × r_p`, orthonormal columns),
    /// without forming the full matrix
    pub fn compressed(&self, frames: &[Mat], provenance: Provenance) -> Result<DiscreteOperator> {
        let npts = self.npts();
        if frames.len() != npts || frames.iter().any(|w| w.nrows() != self.fibre()) {
            return Err(Error::DimMismatch(alloc::format!("{} frames for {} grid points", frames.len(), npts)));
        }
        let offsets: Vec<usize> = frames
            .iter()
            .scan(0, |acc, w| {
                let o = *acc;
                *acc += w.ncols();
                Some(o)
            })
            .collect();
        let total = offsets.last().map_or(0, |o| o + frames[npts - 1].ncols());
        let strides = self.strides();
        let mut h = Mat::from_fn(total, total, |_, _| ZERO);
        // c_μ W_q, reused along every line through q
        let cw: Vec<Vec<Mat>> = self.clifford.iter().map(|c| frames.iter().map(|w| c * w).collect()).collect();
        for p in 0..npts {
            let wp_adj = frames[p].adjoint().to_owned();
            if let Some(v) = self.potential_at(p) {
                let blk = &wp_adj * (v * &frames[p]);
                add_block(&mut h, offsets[p], offsets[p], &blk, ONE);
            }
            for (ax, &m) in self.nodes.iter().enumerate() {
                let ip = (p / strides[ax]) % m;
                let base = p - ip * strides[ax];
                for iq in 0..m {
                    if iq == ip {
                        continue;
                    }
                    let q = base + iq * strides[ax];
                    let f = self.derivs[ax][ip * m + iq];
                    let blk = &wp_adj * &cw[ax][q];
                    add_block(&mut h, offsets[p], offsets[q], &blk, C64::new(f, 0.0));
                }
            }
        }
        DiscreteOperator::new(h, provenance)
    }

    /// the full matrix (point-major, then fibre)
    pub fn dense(&self, provenance: Provenance) -> Result<DiscreteOperator> {
        let b = self.fibre();
        let frames: Vec<Mat> = (0..self.npts()).map(|_| linalg::eye(b)).collect();
        self.compressed(&frames, provenance)
    }
}

/// `W*DW` for `D = Σ_μ c_μ ∂_μ ⊗ I` written in a smooth periodic frame `W`
/// of a coefficient subbundle: the flat operator acts on frame coefficients
/// and the connection `Σ_μ c_μ ⊗ W*∂_μW` is added pointwise, with `∂_μ W`
/// from the collocation derivative. Unlike a direct compression of the
/// collocation matrix this does not produce spurious small eigenvalues.
/// `spin` holds the `c_μ`; frames are `b × r` for every grid point.
pub fn frame_dirac(nodes: &[usize], spin: &[Mat], frames: &[Mat], provenance: Provenance) -> Result<DiscreteOperator> {
    let flat = TorusDirac::new(nodes, spin.to_vec(), Potential::None)?;
    let npts = flat.npts();
    let r = frames.first().map_or(0, |w| w.ncols());
    if frames.len() != npts || frames.iter().any(|w| w.ncols() != r || w.nrows() != frames[0].nrows()) {
        return Err(Error::DimMismatch(alloc::format!("{} frames of rank {r} for {npts} grid points", frames.len())));
    }
    let sdim = flat.fibre();
    let strides = flat.strides();
    let mut pots = Vec::with_capacity(npts);
    for p in 0..npts {
        let wp = frames[p].adjoint().to_owned();
        let mut pot = Mat::zeros(sdim * r, sdim * r);
        for (ax, &m) in nodes.iter().enumerate() {
            let ip = (p / strides[ax]) % m;
            let base = p - ip * strides[ax];
            let mut dw = Mat::zeros(frames[0].nrows(), r);
            for iq in (0..m).filter(|&iq| iq != ip) {
                let f = flat.derivs[ax][ip * m + iq];
                dw += Mat::from_fn(dw.nrows(), r, |i, j| frames[base + iq * strides[ax]][(i, j)] * f);
            }
            let conn = &wp * &dw;
            // keep the anti-Hermitian part, exact in the continuum
            let conn = Mat::from_fn(r, r, |i, j| (conn[(i, j)] - conn[(j, i)].conj()) * 0.5);
            pot += linalg::kron(&spin[ax], &conn);
        }
        pots.push(pot);
    }
    let spin_r: Vec<Mat> = spin.iter().map(|c| linalg::kron(c, &linalg::eye(r))).collect();
    TorusDirac::new(nodes, spin_r, Potential::PerPoint(pots))?.dense(provenance)
}

fn add_block(h: &mut Mat, r0: usize, c0: usize, blk: &Mat, s: C64) {
    for j in 0..blk.ncols() {
        for i in 0..blk.nrows() {
            h[(r0 + i, c0 + j)] += blk[(i, j)] * s;
        }
    }
}

/// nodes of the odd collocation grid with Fourier cutoff `k`
pub fn circle_nodes(k: usize) -> usize {
    2 * k + 1
}

/// `D = c(d/dθ + A)` on the circle, `copies` stacked copies of `C^m ⊗ C^n`
pub fn circle_dirac(model: &ModelBoundary, k: usize, copies: usize) -> Result<TorusDirac> {
    let c = linalg::kron(&linalg::eye(copies), &model.clifford());
    let ca = linalg::kron(&linalg::eye(copies), &(&model.clifford() * &model.a_full()));
    TorusDirac::new(&[circle_nodes(k)], vec![c], Potential::Constant(ca))
}

pub fn build_circle_dirac(model: &ModelBoundary, k: usize) -> Result<DiscreteOperator> {
    let prov = Provenance::new("circle_dirac", &[circle_nodes(k)], "collocation nodes ⊗ C^m ⊗ C^n (unitarily equivalent to Fourier modes |k| ≤ K)")
        .with("cutoff", k as f64);
    circle_dirac(model, k, 1)?.dense(prov)
}

/// `−i d/dθ + 2πb` on the scalar circle, spectrum `{2π(k + b)}`
pub fn build_shifted_circle(b: f64, k: usize) -> Result<DiscreteOperator> {
    let m = circle_nodes(k);
    let f = collocation_derivative(m);
    let h = Mat::from_fn(m, m, |i, j| {
        let d = if i == j { C64::new(2.0 * PI * b, 0.0) } else { ZERO };
        d - I * f[i * m + j]
    });
    DiscreteOperator::new(h, Provenance::new("shifted_circle", &[m], "collocation nodes").with("b", b).with("cutoff", k as f64))
}

/// closed-form spectrum of the shifted circle operator in the Fourier basis
pub fn shifted_circle_spectrum(b: f64, k: usize) -> Vec<f64> {
    let k = k as i64;
    let mut v: Vec<f64> = (-k..=k).map(|j| 2.0 * PI * (j as f64 + b)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// orthonormal frames for the ranges of per-point projection blocks,
/// rejecting blocks with eigenvalues in the aliasing band
pub fn projection_frames(blocks: &[Mat]) -> Result<Vec<Mat>> {
    blocks
        .iter()
        .map(|p| {
            let (vals, v) = linalg::eigh(p)?;
            if let Some(&bad) = vals.iter().find(|&&l| l > ALIASING_BAND.0 && l < ALIASING_BAND.1) {
                return Err(Error::Aliasing(bad));
            }
            let cols: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
            Ok(Mat::from_fn(p.nrows(), cols.len(), |i, j| v[(i, cols[j])]))
        })
        .collect()
}

/// `P H P` restricted to the range of the block-diagonal projection `P`
/// (one block per grid point, point-major layout)
pub fn compress(op: &DiscreteOperator, blocks: &[Mat]) -> Result<DiscreteOperator> {
    let b = blocks.first().map_or(0, |p| p.nrows());
    if b == 0 || blocks.len() * b != op.dim() {
        return Err(Error::DimMismatch(alloc::format!("{} blocks of size {b} against an operator of dimension {}", blocks.len(), op.dim())));
    }
    let frames = projection_frames(blocks)?;
    let offsets: Vec<usize> = frames
        .iter()
        .scan(0, |acc, w| {
            let o = *acc;
            *acc += w.ncols();
            Some(o)
        })
        .collect();
    let total: usize = frames.iter().map(|w| w.ncols()).sum();
    let h = op.matrix();
    let mut out = Mat::from_fn(total, total, |_, _| ZERO);
    for (p, wp) in frames.iter().enumerate() {
        for (q, wq) in frames.iter().enumerate() {
            let hpq = h.as_ref().submatrix(p * b, q * b, b, b);
            if (0..b).all(|i| (0..b).all(|j| hpq[(i, j)] == ZERO)) {
                continue;
            }
            let blk = wp.adjoint() * (hpq * wq);
            add_block(&mut out, offsets[p], offsets[q], &blk, ONE);
        }
    }
    let mut prov = op.provenance().clone();
    prov.builder = alloc::format!("compress({})", prov.builder);
    prov.basis = alloc::format!("range of the projection in {}", prov.basis);
    DiscreteOperator::new(out, prov)
}

/// `e_u(θ)` as a `2d × 2d` block for a constant unitary `u` on the fibre
pub fn cup_block_at(u: &Mat, profile: &BumpProfile, theta: f64) -> Mat {
    let d = u.nrows();
    let b = profile.eval(theta);
    Mat::from_fn(2 * d, 2 * d, |i, j| {
        let id = if i % d == j % d { 1.0 } else { 0.0 };
        match (i < d, j < d) {
            (true, true) => C64::new(id * b.f, 0.0),
            (false, false) => C64::new(id * (1.0 - b.f), 0.0),
            (true, false) => C64::new(id * b.g, 0.0) + u[(i, j - d)] * b.h,
            (false, true) => C64::new(id * b.g, 0.0) + u[(j, i - d)].conj() * b.h,
        }
    })
}

/// `e_u D e_u` for the doubled circle operator, as the compression onto the
/// range of `e_u` sampled on the odd collocation grid
pub fn build_cup_compressed_circle(model: &ModelBoundary, u: &Mat, profile: &BumpProfile, k: usize) -> Result<DiscreteOperator> {
    model.check_unitary(u)?;
    let m = circle_nodes(k);
    let blocks: Vec<Mat> = (0..m).map(|j| cup_block_at(u, profile, j as f64 / m as f64)).collect();
    let frames = projection_frames(&blocks)?;
    let prov = Provenance::new("cup_compressed_circle", &[m], "range of e_u on collocation nodes ⊗ C^2 ⊗ C^m ⊗ C^n")
        .with("cutoff", k as f64)
        .with("eps_flat", profile.eps());
    circle_dirac(model, k, 2)?.compressed(&frames, prov)
}

/// `v(θ) = w(θ) exp(−iθΘ)` at the nodes `θ_j = j/m`, with `w` the first block
/// column of the loop unitary and `u = exp(iΘ)`: a smooth periodic frame of
/// the range of `e_u`
pub fn periodic_cup_frames(u: &Mat, profile: &BumpProfile, m: usize) -> Result<Vec<Mat>> {
    let d = u.nrows();
    let theta = unitary_log(u)?;
    let ublk = linalg::mat_to_block(u);
    (0..m)
        .map(|j| {
            let th = j as f64 / m as f64;
            let w = linalg::block_to_mat(&loop_unitary_block(&ublk, d, &profile.eval(th)), 2 * d);
            let g = linalg::exp_i(&Mat::from_fn(d, d, |r, s| theta[(r, s)] * (-th)))?;
            Ok(&w.as_ref().submatrix(0, 0, 2 * d, d).to_owned() * &g)
        })
        .collect()
}

/// `e_u D e_u` on the range of `e_u`, written in the periodic frames: the
/// frames commute with `c`, so the operator on frame coefficients is
/// `c d/dθ + c v*v′ + v*(cA ⊗ I₂)v` with `v′` from the collocation derivative
pub fn build_cup_frame_circle(model: &ModelBoundary, u: &Mat, profile: &BumpProfile, k: usize) -> Result<DiscreteOperator> {
    model.check_unitary(u)?;
    let m = circle_nodes(k);
    let frames = periodic_cup_frames(u, profile, m)?;
    let c = model.clifford();
    let ca = linalg::kron(&linalg::eye(2), &(&c * &model.a_full()));
    let f = collocation_derivative(m);
    let pots = (0..m)
        .map(|p| {
            let vp = frames[p].adjoint().to_owned();
            let mut dv = Mat::zeros(frames[p].nrows(), frames[p].ncols());
            for q in (0..m).filter(|&q| q != p) {
                dv += Mat::from_fn(dv.nrows(), dv.ncols(), |i, j| frames[q][(i, j)] * f[p * m + q]);
            }
            let conn = &vp * &dv;
            let r = conn.nrows();
            let conn = Mat::from_fn(r, r, |i, j| (conn[(i, j)] - conn[(j, i)].conj()) * 0.5);
            &c * &conn + &vp * &(&ca * &frames[p])
        })
        .collect();
    let prov = Provenance::new("cup_frame_circle", &[m], "periodic frames of e_u on collocation nodes ⊗ C^m ⊗ C^n")
        .with("cutoff", k as f64)
        .with("eps_flat", profile.eps());
    TorusDirac::new(&[m], vec![c], Potential::PerPoint(pots))?.dense(prov)
}

/// Hermitian `Θ` with `u = exp(iΘ)`, eigenvalues in `(−π, π]`
pub fn unitary_log(u: &Mat) -> Result<Mat> {
    let n = u.nrows();
    // a generic real combination of the commuting Hermitian parts separates
    // the eigenvalues of the normal matrix u
    let alpha = 0.577_215_664_901_532_9;
    let k = Mat::from_fn(n, n, |i, j| {
        let re = (u[(i, j)] + u[(j, i)].conj()) * 0.5;
        let im = (u[(i, j)] - u[(j, i)].conj()) * C64::new(0.0, -0.5);
        re + im * alpha
    });
    let (_, v) = linalg::eigh(&k)?;
    let d = v.adjoint() * (u * &v);
    let mut sv = v.clone();
    for j in 0..n {
        let ph = libm::atan2(d[(j, j)].im, d[(j, j)].re);
        for i in 0..n {
            sv[(i, j)] *= ph;
        }
    }
    Ok(linalg::symmetrize(&(&sv * v.adjoint())))
}

/// Legendre–Galerkin discretization of the interval `[0, 1]`
#[derive(Debug, Clone)]
pub struct IntervalBasis {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl IntervalBasis {
    pub fn new(degree: usize) -> Self {
        let (nodes, weights) = linalg::gauss_legendre(2 * degree + 64);
        let values = nodes.iter().map(|&x| linalg::legendre_orthonormal(degree, x)).collect();
        Self { degree, nodes, weights, values }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `⟨L̃_i, L̃_j′⟩`
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.degree + 1;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if (i + j) % 2 == 1 {
                    d[i * n + j] = 2.0 * libm::sqrt((2 * i + 1) as f64) * libm::sqrt((2 * j + 1) as f64);
                }
            }
        }
        d
    }

    /// `⟨L̃_i, ψ L̃_j⟩` by Gauss quadrature
    pub fn multiplication(&self, psi: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let n = self.degree + 1;
        let mut out = vec![0.0; n * n];
        for ((&x, &w), l) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let s = w * psi(x);
            for i in 0..n {
                let li = s * l[i];
                for j in 0..n {
                    out[i * n + j] += li * l[j];
                }
            }
        }
        out
    }

    /// `(L̃_i(0), L̃_i(1))`
    pub fn boundary_values(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.degree + 1;
        let left = (0..n).map(|i| libm::sqrt((2 * i + 1) as f64) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let right = (0..n).map(|i| libm::sqrt((2 * i + 1) as f64)).collect();
        (left, right)
    }
}

/// `D^{ψ,u}(t) = c(d/dx + A + (1 − tψ)(u*Au − A))` on `[0, 1]` with the
/// boundary condition `bc (β(0) ⊕ β(1)) = 0`, restricted to the polynomial
/// fields of degree `≤ p` that satisfy it
pub fn build_interval_dirac(
    model: &ModelBoundary,
    u: &Mat,
    psi: &dyn Fn(f64) -> f64,
    t: f64,
    bc: &BoundaryProjection,
    basis: &IntervalBasis,
) -> Result<DiscreteOperator> {
    model.check_unitary(u)?;
    let d = model.dim();
    let np = basis.degree + 1;
    let total = np * d;
    if bc.matrix().nrows() != 2 * d {
        return Err(Error::DimMismatch(alloc::format!("boundary projection of size {} for fibre {d}", bc.matrix().nrows())));
    }
    let c = model.clifford();
    let a = model.a_full();
    let delta = &(u.adjoint() * (&a * u)) - &a;
    let c_total = &c * &(&a + &delta);
    let c_delta = &c * &delta;
    let d1 = basis.derivative();
    let psi_m = basis.multiplication(psi);
    let mut g = Mat::from_fn(total, total, |_, _| ZERO);
    for i in 0..np {
        for j in 0..np {
            let (dv, pv) = (d1[i * np + j], psi_m[i * np + j]);
            let diag = if i == j { 1.0 } else { 0.0 };
            if dv == 0.0 && pv == 0.0 && diag == 0.0 {
                continue;
            }
            for r in 0..d {
                for s in 0..d {
                    g[(i * d + r, j * d + s)] = c[(r, s)] * dv + c_total[(r, s)] * diag - c_delta[(r, s)] * (t * pv);
                }
            }
        }
    }
    // constraint rows R* T with R a basis of range(bc); the admissible
    // fields are the orthogonal complement of the range of T* R
    let (range, _) = linalg::range_basis(bc.matrix())?;
    let rank = range.ncols();
    if rank != d {
        return Err(Error::NotSelfAdjoint(libm::fabs(rank as f64 - d as f64)));
    }
    let (left, right) = basis.boundary_values();
    let cstar = Mat::from_fn(total, rank, |row, k| {
        let (i, s) = (row / d, row % d);
        range[(s, k)] * left[i] + range[(d + s, k)] * right[i]
    });
    let q = cstar.qr().compute_Q();
    let qn = q.as_ref().submatrix(0, rank, total, total - rank).to_owned();
    let h = qn.adjoint() * (&g * &qn);
    let scale = linalg::max_abs(&h).max(1.0);
    let r = linalg::hermitian_residual(&h) / scale;
    if r > 1e-8 {
        return Err(Error::NotSelfAdjoint(r));
    }
    let h = linalg::symmetrize(&h);
    let prov = Provenance::new("interval_dirac", &[np], "orthonormal Legendre fields ⊗ C^m ⊗ C^n satisfying the boundary condition")
        .with("t", t)
        .with("bc_t", bc.t());
    DiscreteOperator::new(h, prov)
}

/// Eigenbasis of the free operator `c d/dx` on `[0, 1]` under a self-adjoint
/// boundary condition. With `in = (β₊(0), β₋(1))` and `out = (β₊(1), β₋(0))`
/// the condition is `out = W in` for a unitary `W`, and the spectrum is the
/// ladder `θ_j + 2πk` with `e^{−iθ_j}` the eigenvalues of `W`. The ladder is
/// truncated to `|k| ≤ cutoff`.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    cutoff: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ModeBasis {
    pub fn new(cutoff: usize) -> Self {
        let (nodes, weights) = linalg::gauss_legendre(8 * cutoff + 128);
        Self { cutoff, nodes, weights }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// eigenvalues below this modulus are resolved by the truncation
    pub fn resolved(&self) -> f64 {
        PI * self.cutoff as f64
    }
}

struct FreeModes {
    theta: Vec<f64>,
    /// column `j` is the `V₊` amplitude of mode `j`, in the fibre basis
    plus: Mat,
    minus: Mat,
}

fn free_modes(model: &ModelBoundary, bc: &BoundaryProjection) -> Result<FreeModes> {
    let d = model.dim();
    let (qp, qm) = model.grading_blocks()?;
    let dp = qp.ncols();
    if dp != qm.ncols() {
        return Err(Error::InvalidModel(alloc::format!("unbalanced grading {dp} ≠ {}", qm.ncols())));
    }
    let q = Mat::from_fn(2 * d, 2 * d, |i, j| if i == j { ONE } else { ZERO }) - bc.matrix();
    let (l, _) = linalg::range_basis(&q)?;
    if l.ncols() != d {
        return Err(Error::NotSelfAdjoint(libm::fabs(l.ncols() as f64 - d as f64)));
    }
    let l0 = l.as_ref().submatrix(0, 0, d, d).to_owned();
    let l1 = l.as_ref().submatrix(d, 0, d, d).to_owned();
    let stack = |a: Mat, b: Mat| Mat::from_fn(d, d, |i, j| if i < dp { a[(i, j)] } else { b[(i - dp, j)] });
    let inn = stack(qp.adjoint() * &l0, qm.adjoint() * &l1);
    let out = stack(qp.adjoint() * &l1, qm.adjoint() * &l0);
    use faer::linalg::solvers::Solve;
    // W = out · in⁻¹, from in* W* = out*
    let w = inn.adjoint().to_owned().partial_piv_lu().solve(out.adjoint().to_owned()).adjoint().to_owned();
    let r = linalg::unitarity_residual(&w);
    if r > 1e-8 {
        return Err(Error::NotSelfAdjoint(r));
    }
    // W is normal; a generic real combination of its Hermitian parts shares its eigenvectors
    let mix = Mat::from_fn(d, d, |i, j| {
        let (a, b) = (w[(i, j)], w[(j, i)].conj());
        (a + b) * 0.5 + (a - b) * (-I * 0.5 * 0.723_606_797_749_979)
    });
    let (_, v) = linalg::eigh(&linalg::symmetrize(&mix))?;
    let dv = v.adjoint() * (&w * &v);
    let omega: Vec<C64> = (0..d).map(|j| dv[(j, j)]).collect();
    let theta = omega.iter().map(|z| -libm::atan2(z.im, z.re)).collect();
    let vp = v.as_ref().submatrix(0, 0, dp, d).to_owned();
    let vm = Mat::from_fn(d - dp, d, |i, j| v[(dp + i, j)] * omega[j]);
    Ok(FreeModes { theta, plus: &qp * &vp, minus: &qm * &vm })
}

/// `D^{ψ,u}(t)` with boundary condition `bc`, by Galerkin projection onto the
/// free eigenmodes of [`ModeBasis`]; the potential
/// `c(A + (1 − tψ)(u*Au − A))` is bounded, so no spurious modes enter below
/// the truncation
pub fn build_interval_modes(
    model: &ModelBoundary,
    u: &Mat,
    psi: &dyn Fn(f64) -> f64,
    t: f64,
    bc: &BoundaryProjection,
    basis: &ModeBasis,
) -> Result<DiscreteOperator> {
    model.check_unitary(u)?;
    let d = model.dim();
    if bc.matrix().nrows() != 2 * d {
        return Err(Error::DimMismatch(alloc::format!("boundary projection of size {} for fibre {d}", bc.matrix().nrows())));
    }
    let modes = free_modes(model, bc)?;
    let c = model.clifford();
    let a = model.a_full();
    let delta = &(u.adjoint() * (&a * u)) - &a;
    let m0 = &c * &(&a + &delta);
    let m1 = Mat::from_fn(d, d, |_, _| ZERO) - &c * &delta;
    let kk = basis.cutoff as i64;
    let span = (4 * kk + 1) as usize;
    let g: Vec<f64> = basis.nodes.iter().map(|&x| t * psi(x)).collect();
    // table[σσ'][j][j'][n]: ∫ a(x) e^{iμx}, μ = σθ_j − σ'θ_j' + 2πn, n ∈ [−2K, 2K]
    let sides = [(&modes.plus, 1.0), (&modes.minus, -1.0)];
    let mut table = vec![ZERO; 4 * d * d * span];
    let mut h0 = vec![ZERO; basis.nodes.len()];
    let mut h1 = vec![ZERO; basis.nodes.len()];
    let step: Vec<C64> = basis.nodes.iter().map(|&x| (I * (2.0 * PI * x)).exp()).collect();
    for (si, (bs, sg)) in sides.iter().enumerate() {
        for (sj, (bt, tg)) in sides.iter().enumerate() {
            let c0 = bs.adjoint() * (&m0 * *bt);
            let c1 = bs.adjoint() * (&m1 * *bt);
            for j in 0..d {
                for jp in 0..d {
                    let base = sg * modes.theta[j] - tg * modes.theta[jp];
                    for (q, (&x, &w)) in basis.nodes.iter().zip(&basis.weights).enumerate() {
                        // start at n = −2K
                        let e = (I * (base - 2.0 * PI * (2 * kk) as f64) * x).exp() * w;
                        h0[q] = e;
                        h1[q] = e * g[q];
                    }
                    let (a0, a1) = (c0[(j, jp)], c1[(j, jp)]);
                    let off = ((si * 2 + sj) * d * d + j * d + jp) * span;
                    for n in 0..span {
                        let (mut s0, mut s1) = (ZERO, ZERO);
                        for q in 0..h0.len() {
                            s0 += h0[q];
                            s1 += h1[q];
                            h0[q] *= step[q];
                            h1[q] *= step[q];
                        }
                        table[off + n] = a0 * s0 + a1 * s1;
                    }
                }
            }
        }
    }
    let nk = (2 * kk + 1) as usize;
    let total = nk * d;
    let signs = [1i64, -1];
    let h = Mat::from_fn(total, total, |row, col| {
        let (k, j) = (row / d, row % d);
        let (kp, jp) = (col / d, col % d);
        let (kv, kpv) = (k as i64 - kk, kp as i64 - kk);
        let mut acc = ZERO;
        for si in 0..2 {
            for sj in 0..2 {
                let n = signs[si] * kv - signs[sj] * kpv + 2 * kk;
                acc += table[((si * 2 + sj) * d * d + j * d + jp) * span + n as usize];
            }
        }
        if row == col {
            acc += modes.theta[j] + 2.0 * PI * kv as f64;
        }
        acc
    });
    let scale = linalg::max_abs(&h).max(1.0);
    let r = linalg::hermitian_residual(&h) / scale;
    if r > 1e-8 {
        return Err(Error::NotSelfAdjoint(r));
    }
    let prov = Provenance::new("interval_modes", &[nk], "free eigenmodes of c d/dx under the boundary condition ⊗ C^m ⊗ C^n")
        .with("t", t)
        .with("bc_t", bc.t());
    DiscreteOperator::new(linalg::symmetrize(&h), prov)
}

/// the interval operator with boundary condition `P_{bc_t}` and deformation `t`
pub fn interval_operator(
    model: &ModelBoundary,
    u: &Mat,
    profile: &BumpProfile,
    t: f64,
    bc_t: f64,
    basis: &ModeBasis,
) -> Result<DiscreteOperator> {
    let bc = build_pt(model, u, bc_t)?;
    build_interval_modes(model, u, &|x| profile.eval(x).psi(), t, &bc, basis)
}

/// result of comparing the compressed circle operator with the interval
/// operator after the gauge transformation by the loop unitary
#[derive(Debug, Clone, Serialize)]
pub struct ConjugationReport {
    pub cutoff: usize,
    pub low_modes: usize,
    /// operator norm of the difference on Fourier modes `|k| ≤ low_modes`
    pub residual: f64,
}

/// Frames `v(θ) = w(θ) exp(−iθΘ)`, with `w` the first block column of the
/// loop unitary and `u = exp(iΘ)`, are smooth and periodic. The circle
/// operator compressed to them is compared with
/// `c d/dθ + c(−iΘ + G*(A + f₂Δ)G)`, the interval operator `D^{1−f₂,u}` with
/// `β(0) = uβ(1)` written in the periodic gauge `G = exp(−iθΘ)`.
pub fn conjugation_check(model: &ModelBoundary, u: &Mat, profile: &BumpProfile, k: usize, low_modes: usize) -> Result<ConjugationReport> {
    model.check_unitary(u)?;
    let d = model.dim();
    let m = circle_nodes(k);
    let theta = unitary_log(u)?;
    let ublk = linalg::mat_to_block(u);
    let c = model.clifford();
    let a = model.a_full();
    let delta = &(u.adjoint() * (&a * u)) - &a;
    let mut frames = Vec::with_capacity(m);
    let mut pots = Vec::with_capacity(m);
    for j in 0..m {
        let th = j as f64 / m as f64;
        let b = profile.eval(th);
        let w = linalg::block_to_mat(&loop_unitary_block(&ublk, d, &b), 2 * d);
        let g = linalg::exp_i(&Mat::from_fn(d, d, |r, s| theta[(r, s)] * (-th)))?;
        let w1 = w.as_ref().submatrix(0, 0, 2 * d, d).to_owned();
        frames.push(&w1 * &g);
        let f2 = b.f2();
        let inner = Mat::from_fn(d, d, |r, s| a[(r, s)] + delta[(r, s)] * f2);
        let gig = g.adjoint() * (&inner * &g);
        let pot = Mat::from_fn(d, d, |r, s| gig[(r, s)] - I * theta[(r, s)]);
        pots.push(&c * &pot);
    }
    let prov = Provenance::new("conjugation_check", &[m], "periodic gauge frames");
    let lhs = circle_dirac(model, k, 2)?.compressed(&frames, prov.clone())?;
    let rhs = TorusDirac::new(&[m], vec![c.clone()], Potential::PerPoint(pots))?.dense(prov)?;
    let diff = lhs.matrix() - rhs.matrix();
    // Fourier modes |k| ≤ low_modes in each fibre direction
    let kk = low_modes.min(k);
    let nm = 2 * kk + 1;
    let norm = 1.0 / libm::sqrt(m as f64);
    let e = Mat::from_fn(m * d, nm * d, |row, col| {
        let (j, r) = (row / d, row % d);
        let (q, s) = (col / d, col % d);
        if r != s {
            return ZERO;
        }
        let kv = q as f64 - kk as f64;
        (I * 2.0 * PI * kv * j as f64 / m as f64).exp() * norm
    });
    let de = &diff * &e;
    let gram = de.adjoint() * &de;
    let top = linalg::eigvalsh(&linalg::symmetrize(&gram))?.last().copied().unwrap_or(0.0);
    Ok(ConjugationReport { cutoff: k, low_modes: kk, residual: libm::sqrt(top.max(0.0)) })
}

/// largest gap between the `count` eigenvalues of smallest modulus of the
/// compressed circle operator and of the interval operator `D^{1−f₂,u}`
/// with `β(0) = uβ(1)`
pub fn circle_interval_spectral_gap(
    model: &ModelBoundary,
    u: &Mat,
    profile: &BumpProfile,
    k: usize,
    basis: &ModeBasis,
    count: usize,
) -> Result<f64> {
    let circle = build_cup_compressed_circle(model, u, profile, k)?;
    let interval = interval_operator(model, u, profile, 1.0, PI / 4.0, basis)?;
    let low = |op: &DiscreteOperator| -> Result<Vec<f64>> {
        let mut v = op.eigenvalues()?;
        v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        v.truncate(count);
        v.sort_by(f64::total_cmp);
        Ok(v)
    };
    let (a, b) = (low(&circle)?, low(&interval)?);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    fn offdiag_model(a: f64) -> ModelBoundary {
        let am = Mat::from_fn(2, 2, |i, j| if i != j { C64::new(a, 0.0) } else { ZERO });
        let g = Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { ONE } else { -ONE });
        ModelBoundary::new(am, g, None, 1).unwrap()
    }

    #[test]
    fn collocation_differentiates_trig_polynomials() {
        let m = 9;
        let f = collocation_derivative(m);
        for k in -4i64..=4 {
            for i in 0..m {
                let x = |j: usize| 2.0 * PI * k as f64 * j as f64 / m as f64;
                let mut acc = 0.0;
                for j in 0..m {
                    acc += f[i * m + j] * libm::sin(x(j));
                }
                let want = 2.0 * PI * k as f64 * libm::cos(x(i));
                assert!((acc - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shifted_circle_matches_closed_form() {
        let op = build_shifted_circle(0.25, 32).unwrap();
        let got = sorted(op.eigenvalues().unwrap());
        let want = shifted_circle_spectrum(0.25, 32);
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn flat_circle_spectrum() {
        let a = 0.7;
        let model = offdiag_model(a);
        let op = build_circle_dirac(&model, 10).unwrap();
        let got = sorted(op.eigenvalues().unwrap());
        let mut want: Vec<f64> = (-10i64..=10)
            .flat_map(|k| {
                let l = libm::sqrt((2.0 * PI * k as f64).powi(2) + a * a);
                [l, -l]
            })
            .collect();
        want.sort_by(f64::total_cmp);
        let err = got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn product_block_identity_is_exact() {
        let mut rng = ModelRng::seeded(4);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let op = build_circle_dirac(&model, 3).unwrap();
        let m = 7;
        let f = collocation_derivative(m);
        let c = model.clifford();
        let ca = &c * &model.a_full();
        let want = Mat::from_fn(14, 14, |i, j| {
            let (p, r, q, s) = (i / 2, i % 2, j / 2, j % 2);
            c[(r, s)] * f[p * m + q] + if p == q { ca[(r, s)] } else { ZERO }
        });
        assert!(linalg::max_abs_mat_diff(op.matrix(), &want) < 1e-14);
    }

    #[test]
    fn boundary_projection_of_diagonal_model() {
        // A = diag(1, −1) with the off-diagonal grading
        let am = Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { ONE } else { -ONE });
        let g = Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO });
        let model = ModelBoundary::new(am, g, None, 1).unwrap();
        let p = boundary_projection(&model).unwrap();
        assert!((p[(0, 0)] - ONE).norm() < 1e-14 && p[(1, 1)].norm() < 1e-14 && p[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn half_rank_and_lagrangian() {
        let mut rng = ModelRng::seeded(11);
        let model = ModelBoundary::random(&mut rng, 4, 2, 1.0).unwrap();
        let p = boundary_projection(&model).unwrap();
        let tr: f64 = (0..8).map(|i| p[(i, i)].re).sum();
        assert!((tr - 4.0).abs() < 1e-12);
        let model = ModelBoundary::random_with_kernel(&mut rng, 4, 1, 1, 1.0).unwrap();
        assert_eq!(model.lagrangian().unwrap().ncols(), 1);
        let p = boundary_projection(&model).unwrap();
        assert!(linalg::projection_residual(&p) < 1e-12);
        let tr: f64 = (0..4).map(|i| p[(i, i)].re).sum();
        assert!((tr - 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_lagrangian_rejected() {
        let z = Mat::from_fn(2, 2, |_, _| ZERO);
        let g = Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { ONE } else { -ONE });
        assert_eq!(ModelBoundary::new(z, g, None, 1), Err(Error::MissingLagrangian(2)));
    }

    #[test]
    fn pt_endpoints() {
        let mut rng = ModelRng::seeded(5);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let d = model.dim();
        let p = boundary_projection(&model).unwrap();
        let p0 = build_pt(&model, &u, 0.0).unwrap();
        let upu = u.adjoint() * (&p * &u);
        let want0 = Mat::from_fn(2 * d, 2 * d, |i, j| match (i < d, j < d) {
            (true, true) => p[(i, j)],
            (false, false) => (if i == j { ONE } else { ZERO }) - upu[(i - d, j - d)],
            _ => ZERO,
        });
        assert!(linalg::max_abs_mat_diff(p0.matrix(), &want0) < 1e-14);
        let p1 = build_pt(&model, &u, PI / 4.0).unwrap();
        let want1 = Mat::from_fn(2 * d, 2 * d, |i, j| match (i < d, j < d) {
            (true, true) | (false, false) => C64::new(if i == j { 0.5 } else { 0.0 }, 0.0),
            (true, false) => -u[(i, j - d)] * 0.5,
            (false, true) => -u[(j, i - d)].conj() * 0.5,
        });
        assert!(linalg::max_abs_mat_diff(p1.matrix(), &want1) < 1e-14);
        for t in [0.1, 0.3, 0.7] {
            let pt = build_pt(&model, &u, t).unwrap();
            assert!(linalg::projection_residual(pt.matrix()) < 1e-12);
            assert_eq!(pt.rank(), d);
        }
    }

    #[test]
    fn proof_identities_hold() {
        let mut rng = ModelRng::seeded(6);
        let model = ModelBoundary::random(&mut rng, 4, 2, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 2.0).unwrap();
        let r = mu_symmetry_check(&model, &u, &[0.0, 0.2, 0.5, PI / 4.0]).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
    }

    #[test]
    fn interval_aps_oracle() {
        // eigenvalues ±√(ω² + a²) with ω cot ω = −a
        let a = 0.8;
        let model = offdiag_model(a);
        let u = linalg::eye(2);
        let basis = IntervalBasis::new(60);
        let op = build_interval_dirac(&model, &u, &|_| 1.0, 1.0, &build_pt(&model, &u, 0.0).unwrap(), &basis).unwrap();
        let got = sorted(op.eigenvalues().unwrap());
        let mut omegas = Vec::new();
        for k in 0..4 {
            // ω cot ω + a = 0 has one root in each (kπ + π/2, (k+1)π)
            let (mut lo, mut hi) = (k as f64 * PI + PI / 2.0, (k + 1) as f64 * PI - 1e-12);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let g = mid * libm::cos(mid) / libm::sin(mid) + a;
                if g > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            omegas.push(0.5 * (lo + hi));
        }
        for w in omegas {
            let l = libm::sqrt(w * w + a * a);
            for target in [l, -l] {
                let err = got.iter().map(|x| (x - target).abs()).fold(f64::INFINITY, f64::min);
                assert!(err < 1e-9, "λ = {target}: {err}");
            }
        }
        let sum: f64 = got.iter().filter(|x| x.abs() < 30.0).sum();
        assert!(sum.abs() < 1e-8, "asymmetric low spectrum {sum}");
    }

    #[test]
    fn interval_periodic_condition_is_circle() {
        let a = 0.5;
        let model = offdiag_model(a);
        let u = linalg::eye(2);
        let basis = IntervalBasis::new(80);
        let op = build_interval_dirac(&model, &u, &|_| 1.0, 1.0, &build_pt(&model, &u, PI / 4.0).unwrap(), &basis).unwrap();
        let got = sorted(op.eigenvalues().unwrap());
        for k in 0..4 {
            let l = libm::sqrt((2.0 * PI * k as f64).powi(2) + a * a);
            let err = got.iter().map(|x| (x - l).abs()).fold(f64::INFINITY, f64::min);
            assert!(err < 1e-9, "k = {k}: {err}");
        }
    }

    #[test]
    fn free_modes_solve_the_aps_oracle() {
        let a = 0.8;
        let model = offdiag_model(a);
        let u = linalg::eye(2);
        let bc = build_pt(&model, &u, 0.0).unwrap();
        let modes = build_interval_modes(&model, &u, &|_| 1.0, 1.0, &bc, &ModeBasis::new(60)).unwrap();
        let legendre = build_interval_dirac(&model, &u, &|_| 1.0, 1.0, &bc, &IntervalBasis::new(60)).unwrap();
        let low = |op: &DiscreteOperator| {
            let mut v = op.eigenvalues().unwrap();
            v.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
            v.truncate(8);
            sorted(v)
        };
        let (x, y) = (low(&modes), low(&legendre));
        let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{x:?} vs {y:?}");
    }

    #[test]
    fn free_ladder_without_potential() {
        // A = 0: the spectrum is exactly the ladder θ_j + 2πk
        let g = Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { ONE } else { -ONE });
        let l = Mat::from_fn(2, 1, |_, _| C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0));
        let model = ModelBoundary::new(Mat::from_fn(2, 2, |_, _| ZERO), g, Some(l), 1).unwrap();
        let mut rng = ModelRng::seeded(5);
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let basis = ModeBasis::new(6);
        for t in [0.0, 0.4, PI / 4.0] {
            let bc = build_pt(&model, &u, t).unwrap();
            let modes = free_modes(&model, &bc).unwrap();
            let op = build_interval_modes(&model, &u, &|x| x, 0.5, &bc, &basis).unwrap();
            let got = sorted(op.eigenvalues().unwrap());
            let mut want: Vec<f64> = modes.theta.iter().flat_map(|th| (-6..=6).map(move |k| th + 2.0 * PI * k as f64)).collect();
            want = sorted(want);
            let err = got.iter().zip(&want).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "t = {t}: {err}");
        }
    }

    #[test]
    fn modes_agree_with_legendre_away_from_spurious_modes() {
        let mut rng = ModelRng::seeded(11);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let profile = BumpProfile::new(256, 0.05).unwrap();
        let psi = |x: f64| profile.eval(x).psi();
        let bc = build_pt(&model, &u, 0.3).unwrap();
        let low = |op: DiscreteOperator| {
            let mut v = op.eigenvalues().unwrap();
            v.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
            v.truncate(6);
            sorted(v)
        };
        let x = low(build_interval_modes(&model, &u, &psi, 1.0, &bc, &ModeBasis::new(80)).unwrap());
        let y = low(build_interval_dirac(&model, &u, &psi, 1.0, &bc, &IntervalBasis::new(160)).unwrap());
        let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{x:?} vs {y:?}");
    }

    #[test]
    fn commuting_unitary_gives_equivalent_operator() {
        let mut rng = ModelRng::seeded(9);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let basis = ModeBasis::new(20);
        let profile = BumpProfile::new(64, 0.05).unwrap();
        let id = linalg::eye(2);
        let phase = Mat::from_fn(2, 2, |i, j| if i == j { (I * 0.7).exp() } else { ZERO });
        let a = interval_operator(&model, &id, &profile, 1.0, 0.0, &basis).unwrap();
        let b = interval_operator(&model, &phase, &profile, 1.0, 0.0, &basis).unwrap();
        let (ea, eb) = (sorted(a.eigenvalues().unwrap()), sorted(b.eigenvalues().unwrap()));
        let err = ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn compress_by_identity_and_constant_projection() {
        let mut rng = ModelRng::seeded(2);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let op = build_circle_dirac(&model, 4).unwrap();
        let id: Vec<Mat> = (0..9).map(|_| linalg::eye(2)).collect();
        let same = compress(&op, &id).unwrap();
        let (x, y) = (sorted(op.eigenvalues().unwrap()), sorted(same.eigenvalues().unwrap()));
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
        let pr: Vec<Mat> = (0..9).map(|_| Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { ONE } else { ZERO })).collect();
        let sub = compress(&op, &pr).unwrap();
        assert_eq!(sub.dim(), 9);
        for p in 0..9 {
            for q in 0..9 {
                assert!((sub.matrix()[(p, q)] - op.matrix()[(2 * p, 2 * q)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn aliasing_detected() {
        let half = vec![Mat::from_fn(2, 2, |_, _| C64::new(0.5, 0.0)); 3];
        let bad: Vec<Mat> = half.iter().map(|m| Mat::from_fn(2, 2, |i, j| m[(i, j)] * 0.8)).collect();
        assert!(matches!(projection_frames(&bad), Err(Error::Aliasing(_))));
    }

    #[test]
    fn cup_compression_has_half_rank() {
        let mut rng = ModelRng::seeded(3);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let profile = BumpProfile::new(64, 0.05).unwrap();
        let op = build_cup_compressed_circle(&model, &u, &profile, 16).unwrap();
        assert_eq!(op.dim(), 33 * 2);
    }

    #[test]
    fn unitary_log_inverts_exp() {
        let mut rng = ModelRng::seeded(8);
        let model = ModelBoundary::random(&mut rng, 4, 1, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let th = unitary_log(&u).unwrap();
        let back = linalg::exp_i(&th).unwrap();
        assert!(linalg::max_abs_mat_diff(&back, &u) < 1e-12);
        let c = model.clifford();
        assert!(linalg::max_abs_mat_diff(&(&th * &c), &(&c * &th)) < 1e-10);
    }

    #[test]
    fn conjugation_identity_converges() {
        let mut rng = ModelRng::seeded(12);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let profile = BumpProfile::new(256, 0.02).unwrap();
        let coarse = conjugation_check(&model, &u, &profile, 32, 8).unwrap();
        let fine = conjugation_check(&model, &u, &profile, 128, 8).unwrap();
        assert!(fine.residual < 1e-6, "{fine:?}");
        assert!(fine.residual * 10.0 < coarse.residual, "{coarse:?} {fine:?}");
        let gap = circle_interval_spectral_gap(&model, &u, &profile, 128, &ModeBasis::new(80), 10).unwrap();
        assert!(gap < 1e-6, "{gap}");
    }

    #[test]
    fn conjugation_identity_without_twist() {
        let mut rng = ModelRng::seeded(13);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let profile = BumpProfile::new(1024, 0.02).unwrap();
        let r = conjugation_check(&model, &linalg::eye(2), &profile, 512, 8).unwrap();
        assert!(r.residual < 1e-10, "{r:?}");
    }
}
