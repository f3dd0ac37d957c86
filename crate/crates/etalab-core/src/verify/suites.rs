//! The verification suites. Each returns a [`SuiteReport`]; numerical
//! failures become failed checks instead of errors.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::error::Result;
use crate::fourier_fn::GridFunction;
use crate::ktheory::{self, BumpProfile, K_MAX};
use crate::models::{self, ModelRng};
use crate::operators::{self, ModeBasis};
use crate::spectral::{self, FlowOptions, SpectrumData};

use super::boundary::{self, BoundaryInstance, CoefficientPath};
use super::config::SuiteConfig;
use super::instances::{CirclePath, QwzProjection, TorusPath};
use super::report::{Check, SuiteReport, Trend, TrendRow};

/// runs independent work items; the order of the results matches the input
pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_iter().map(f).collect()
    }
}

/// names of the suites, in the order [`run_all`] runs them
pub const SUITES: [&str; 6] = ["forms", "eta_oracle", "theorem1", "prop_path", "eta_equivalence", "sf_squares"];

pub fn run_suite<E: Executor>(name: &str, cfg: &SuiteConfig, exec: &E) -> Result<SuiteReport> {
    cfg.validate()?;
    Ok(match name {
        "forms" => verify_forms(cfg, exec),
        "eta_oracle" => eta_oracle(cfg, exec),
        "theorem1" => verify_theorem_main(cfg, exec),
        "prop_path" => verify_prop_path(cfg, exec),
        "eta_equivalence" => verify_eta_equivalence(cfg, exec),
        "sf_squares" => verify_sf_squares(cfg, exec),
        other => return Err(crate::Error::InvalidParameter(format!("unknown suite {other:?}"))),
    })
}

pub fn run_all<E: Executor>(cfg: &SuiteConfig, exec: &E) -> Result<SuiteReport> {
    let parts = SUITES.iter().map(|s| run_suite(s, cfg, exec)).collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::merge("all", cfg.seed, parts))
}

/// records `Ok` residuals as checks and errors as failed checks
fn checked(report: &mut SuiteReport, name: String, residual: Result<f64>, tol: f64) {
    report.check(match residual {
        Ok(r) => Check::below(name, r, tol),
        Err(e) => Check::failed(name, e.to_string()),
    });
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that it fails the check
    v.into_iter().fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

fn collect_max(v: Vec<Result<f64>>) -> Result<f64> {
    Ok(max_of(v.into_iter().collect::<Result<Vec<_>>>()?))
}

// ---------------------------------------------------------------- forms

const CUP_DEGREE: usize = 2;
const CUP_AMPLITUDE: f64 = 1.0;
/// matrix size of the random unitaries
const CUP_RANK: usize = 2;
/// grid of `Y = S¹`
const CIRCLE_Y: usize = 32;

pub fn verify_forms<E: Executor>(cfg: &SuiteConfig, exec: &E) -> SuiteReport {
    let f = &cfg.forms;
    let mut r = SuiteReport::new("forms", cfg.seed);

    match BumpProfile::new(f.lemma_n_theta, f.eps_flat) {
        Ok(p) => {
            for k in 1..=5u32 {
                let res = ktheory::lemma_id_integral(&p, k).map(|v| {
                    r.value(format!("lemma/k={k}"), v);
                    (v - ktheory::lemma_id_closed_form(k)).abs()
                });
                checked(&mut r, format!("lemma/k={k}"), res, cfg.tol(f.lemma_tol));
            }
        }
        Err(e) => r.check(Check::failed("lemma", e.to_string())),
    }

    let profile = match BumpProfile::new(f.n_theta, f.eps_flat) {
        Ok(p) => p,
        Err(e) => {
            r.check(Check::failed("profile", e.to_string()));
            return r;
        }
    };
    let circle = [CIRCLE_Y];
    let torus = [f.n_y, f.n_y];

    // cup-product contract: e_U is a projection, 𝒰 conjugates the Bott pair
    for (label, dims) in [("S1", &circle[..]), ("T2", &torus[..])] {
        let seeds: Vec<u64> = (0..f.cup_unitaries as u64).map(|i| cfg.seed + i).collect();
        let res = exec.map(seeds, |s| -> Result<(f64, f64)> {
            let u = models::random_torus_unitary(&mut ModelRng::seeded(s), dims, CUP_RANK, CUP_DEGREE, CUP_AMPLITUDE)?;
            let e = ktheory::cup_with_bott(&u, &profile)?;
            let (conj, unit) = ktheory::loop_conjugation_residual(&u, &profile)?;
            Ok((e.max_projection_residual(), conj.max(unit)))
        });
        let res: Result<Vec<_>> = res.into_iter().collect();
        let (proj, conj) = match res {
            Ok(v) => (Ok(max_of(v.iter().map(|x| x.0))), Ok(max_of(v.iter().map(|x| x.1)))),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        checked(&mut r, format!("cup/{label}/projection"), proj, cfg.tol(f.cup_tol));
        checked(&mut r, format!("cup/{label}/conjugation"), conj, cfg.tol(f.cup_tol));
    }

    // π_*Ch(e_U) = −Ch(U) and ∫Ch₂(e_U) = −n for windings on S¹
    let windings = exec.map(f.windings.clone(), |w| -> Result<(f64, f64)> {
        let u = models::winding_unitary(&circle, w)?;
        let (push, ch2) = pushforward_residual(&u, &profile)?;
        Ok((push, (ch2 + w as f64).abs()))
    });
    let windings: Result<Vec<_>> = windings.into_iter().collect();
    let seeds: Vec<u64> = (0..f.torus_unitaries as u64).map(|i| cfg.seed + 1000 + i).collect();
    let torus_push = exec.map(seeds, |s| -> Result<f64> {
        let u = models::random_torus_unitary(&mut ModelRng::seeded(s), &torus, CUP_RANK, CUP_DEGREE, CUP_AMPLITUDE)?;
        Ok(pushforward_residual(&u, &profile)?.0)
    });
    match windings {
        Ok(v) => {
            r.check(Check::below("pushforward/S1", max_of(v.iter().map(|x| x.0)), cfg.tol(f.chern_tol)));
            for (w, x) in f.windings.iter().zip(&v) {
                r.check(Check::below(format!("quantization/n={w}"), x.1, cfg.tol(f.chern_tol)));
            }
        }
        Err(e) => r.check(Check::failed("pushforward/S1", e.to_string())),
    }
    checked(&mut r, "pushforward/T2".into(), collect_max(torus_push), cfg.tol(f.chern_tol));

    // π_*Tch(e_path) = Tch(U_path)
    let seeds: Vec<u64> = (0..f.paths as u64).map(|i| cfg.seed + 2000 + i).collect();
    let tch = exec.map(seeds, |s| -> Result<f64> {
        let path = models::random_unitary_path(&mut ModelRng::seeded(s), &circle, CUP_RANK, f.n_s, CUP_DEGREE, CUP_AMPLITUDE)?;
        let lhs = ktheory::tch_projection(&path.cup_with_bott(&profile)?, K_MAX)?.pushforward_circle()?;
        let rhs = ktheory::tch_unitary(&path, K_MAX)?;
        lhs.max_diff(&rhs)
    });
    checked(&mut r, "transgression/S1".into(), collect_max(tch), cfg.tol(f.tch_tol));
    r
}

/// `‖π_*Ch(e_U) + Ch(U)‖_∞` and `∫Ch₂(e_U)`
fn pushforward_residual(u: &GridFunction, profile: &BumpProfile) -> Result<(f64, f64)> {
    let e = ktheory::cup_with_bott(u, profile)?;
    let ch = ktheory::chern_even(&e, K_MAX)?;
    let push = ch.pushforward_circle()?.add(&ktheory::chern_odd(u, K_MAX)?)?.sup_norm();
    let ch2 = if u.dim() == 1 { ch.degree_part(2).integrate()?.re } else { f64::NAN };
    Ok((push, ch2))
}

// ----------------------------------------------------------- eta oracle

/// cutoff of the collocation cross-check of the Fourier ladder
const ORACLE_COLLOCATION_CUTOFF: usize = 64;

pub fn eta_oracle<E: Executor>(cfg: &SuiteConfig, exec: &E) -> SuiteReport {
    let o = &cfg.eta_oracle;
    let mut r = SuiteReport::new("eta_oracle", cfg.seed);
    let res = exec.map(o.b.clone(), |b| -> Result<(f64, f64)> {
        let spec = SpectrumData::new(operators::shifted_circle_spectrum(b, o.cutoff), None, None)?;
        let eta = spectral::eta_default(&spec).value;
        let op = operators::build_shifted_circle(b, ORACLE_COLLOCATION_CUTOFF)?;
        let got = spectral::sorted_eigenvalues(&op)?;
        let want = operators::shifted_circle_spectrum(b, ORACLE_COLLOCATION_CUTOFF);
        let ladder = max_of(got.iter().zip(&want).map(|(a, b)| (a - b).abs()));
        Ok((eta, ladder))
    });
    for (&b, x) in o.b.iter().zip(res) {
        match x {
            Ok((eta, ladder)) => {
                r.value(format!("eta/b={b}"), eta);
                r.check(Check::below(format!("eta/b={b}"), (eta - (1.0 - 2.0 * b)).abs(), cfg.tol(o.tol)));
                r.check(Check::below(format!("ladder/b={b}"), ladder, cfg.tol(1e-8)));
            }
            Err(e) => r.check(Check::failed(format!("eta/b={b}"), e.to_string())),
        }
    }
    r
}

// ------------------------------------------------- ξ-difference identity

pub fn verify_theorem_main<E: Executor>(cfg: &SuiteConfig, exec: &E) -> SuiteReport {
    let mut r = SuiteReport::new("theorem1", cfg.seed);
    if cfg.theorem1.instance.circle() {
        circle_instances(cfg, exec, &mut r);
    }
    if cfg.theorem1.instance.torus() {
        torus_instance(cfg, exec, &mut r);
    }
    r
}

struct XiRun {
    lhs: f64,
    rhs: f64,
    sf: i64,
    eta_error: f64,
}

fn circle_instances<E: Executor>(cfg: &SuiteConfig, exec: &E, r: &mut SuiteReport) {
    let c = &cfg.theorem1.circle;
    let flow = FlowOptions::default();
    let grid = boundary::uniform_grid(0.0, 1.0, c.flow_points);
    for i in 0..c.paths {
        let seed = cfg.seed + i as u64;
        let path = CirclePath::random(&mut ModelRng::seeded(seed), c.degree);
        let rhs = path.projection_path(c.n_theta, c.n_s).and_then(|p| ktheory::tch_projection(&p, K_MAX)?.integrate());
        let rhs = match rhs {
            Ok(z) => z.re,
            Err(e) => {
                r.check(Check::failed(format!("circle/seed={seed}"), e.to_string()));
                continue;
            }
        };
        let runs = exec.map(c.cutoffs.clone(), |k| -> Result<(XiRun, spectral::FlowResult)> {
            let xi = |s: f64| -> Result<spectral::EtaEstimate> { Ok(spectral::eta_default(&spectral::eigenvalues(&path.operator(s, k, 1.0)?)?)) };
            let fr = spectral::spectral_flow(|s| spectral::sorted_eigenvalues(&path.operator(s, k, 1.0)?), &grid, &flow)?;
            let rep = spectral::xi_difference_identity(&xi(0.0)?, &xi(1.0)?, &fr, rhs)?;
            Ok((XiRun { lhs: rep.lhs, rhs, sf: rep.sf, eta_error: rep.eta_error }, fr))
        });
        let name = format!("circle/seed={seed}");
        let mut rows = Vec::new();
        let mut last = None;
        for (&k, run) in c.cutoffs.iter().zip(runs) {
            match run {
                Ok((x, fr)) => {
                    rows.push(TrendRow { level: k as f64, residual: (x.lhs - x.rhs).abs() });
                    last = Some((k, x, fr));
                }
                Err(e) => {
                    last = None;
                    r.check(Check::failed(format!("{name}/K={k}"), e.to_string()));
                }
            }
        }
        if let Some((k, x, fr)) = last {
            record_xi(r, &name, &x);
            r.branches(&name, &fr.branches);
            if let Ok(op) = path.operator(0.0, k, 1.0) {
                r.provenance.push(op.provenance().clone());
            }
            r.check(Check::below(&name, (x.lhs - x.rhs).abs(), cfg.tol(c.tol)));
        }
        r.trend(Trend::new(name, rows));
    }
}

fn record_xi(r: &mut SuiteReport, name: &str, x: &XiRun) {
    r.value(format!("{name}/lhs"), x.lhs);
    r.value(format!("{name}/rhs"), x.rhs);
    r.value(format!("{name}/sf"), x.sf as f64);
    r.value(format!("{name}/eta_error"), x.eta_error);
}

fn torus_instance<E: Executor>(cfg: &SuiteConfig, exec: &E, r: &mut SuiteReport) {
    let t = &cfg.theorem1.torus;
    let path = TorusPath { projection: QwzProjection { mass: t.mass }, kappa: t.kappa };
    let rhs = match path.unitary_path(t.n_xy, t.n_s).and_then(|p| ktheory::tch_unitary(&p, K_MAX)?.integrate()) {
        Ok(z) => z.re,
        Err(e) => {
            r.check(Check::failed("torus", e.to_string()));
            return;
        }
    };
    let profile = match BumpProfile::new(t.profile_n_theta, t.eps_flat) {
        Ok(p) => p,
        Err(e) => {
            r.check(Check::failed("torus", e.to_string()));
            return;
        }
    };
    let flow = FlowOptions::default();
    let runs = exec.map(t.cutoffs.clone(), |k| -> Result<XiRun> {
        let op0 = path.operator(0.0, k, t.m_theta, &profile)?;
        let op1 = path.operator(1.0, k, t.m_theta, &profile)?;
        let (s0, s1) = (spectral::eigenvalues(&op0)?, spectral::eigenvalues(&op1)?);
        let sf = spectral::spectral_flow_endpoints(s0.eigenvalues(), s1.eigenvalues(), flow.eps_ker)?;
        let (e0, e1) = (spectral::eta_default(&s0), spectral::eta_default(&s1));
        Ok(XiRun { lhs: e1.xi - e0.xi - sf as f64, rhs, sf, eta_error: e0.error.max(e1.error) })
    });
    let mut rows = Vec::new();
    let mut last = None;
    for (&k, run) in t.cutoffs.iter().zip(runs) {
        match run {
            Ok(x) => {
                let res = (x.lhs - x.rhs).abs();
                r.value(format!("torus/K={k}/lhs"), x.lhs);
                rows.push(TrendRow { level: k as f64, residual: res });
                last = Some((k, x));
            }
            Err(e) => {
                last = None;
                r.check(Check::failed(format!("torus/K={k}"), e.to_string()));
            }
        }
    }
    if let Some((k, x)) = last {
        record_xi(r, "torus", &x);
        r.value("torus/expected_tch", -path.expected_tch_factor());
        if let Ok(op) = path.operator(0.0, k, t.m_theta, &profile) {
            r.provenance.push(op.provenance().clone());
        }
        r.check(Check::below("torus", (x.lhs - x.rhs).abs(), cfg.tol(t.tol)));
    }
    let trend = Trend::new("torus", rows).with_rationale("the circle factor is fixed at m_theta collocation nodes; only the Fourier cutoff on T² is refined");
    r.check(Check::exact("torus/trend", i64::from(!trend.non_increasing)));
    r.trend(trend);
}

// ------------------------------------------------------------ prop path

pub fn verify_prop_path<E: Executor>(cfg: &SuiteConfig, exec: &E) -> SuiteReport {
    let p = &cfg.prop_path;
    let mut r = SuiteReport::new("prop_path", cfg.seed);
    let basis = ModeBasis::new(p.mode_cutoff);
    let flow = FlowOptions::default();
    let ts = boundary::uniform_grid(0.0, FRAC_PI_4, p.t_points);
    let items: Vec<(u64, [usize; 2])> = p.models.iter().enumerate().map(|(i, &mn)| (cfg.seed + i as u64, mn)).collect();
    let res = exec.map(items.clone(), |(seed, [m, n])| -> Result<(boundary::PathEta, spectral::FlowResult, f64, BoundaryInstance)> {
        let inst = BoundaryInstance::random(seed, m, n, p.unitary_scale, BumpProfile::new(256, p.eps_flat)?)?;
        let (pe, fr) = boundary::eta_along_boundary_path(&inst, p.t_points, &basis, &flow)?;
        let proof = operators::mu_symmetry_check(&inst.model, &inst.u, &ts)?.max();
        Ok((pe, fr, proof, inst))
    });
    for ((seed, [m, n]), x) in items.into_iter().zip(res) {
        let name = format!("seed={seed}/m={m}/n={n}");
        match x {
            Ok((pe, fr, proof, inst)) => {
                r.value(format!("{name}/raw_deviation"), pe.deviation);
                r.value(format!("{name}/sf"), pe.sf as f64);
                r.value(format!("{name}/max_eta_error"), max_of(pe.eta_error.iter().copied()));
                r.check(Check::below(format!("{name}/deviation"), pe.corrected_deviation, cfg.tol(p.tol)));
                r.check(Check::below(format!("{name}/proof"), proof, cfg.tol(p.proof_tol)));
                r.branches(&name, &fr.branches);
                if let Ok(s) = inst.interval_spectrum(1.0, 0.0, &basis) {
                    r.provenance.extend(s.provenance().cloned());
                }
            }
            Err(e) => r.check(Check::failed(name, e.to_string())),
        }
    }
    r
}

// ------------------------------------------------------- eta equivalence

/// profile grid of the boundary instances
const BOUNDARY_PROFILE_N: usize = 256;
/// seed offset of the conjugation instance
const CONJUGATION_SEED: u64 = 12;

pub fn verify_eta_equivalence<E: Executor>(cfg: &SuiteConfig, exec: &E) -> SuiteReport {
    let q = &cfg.eta_equivalence;
    let mut r = SuiteReport::new("eta_equivalence", cfg.seed);
    let flow = FlowOptions::default();
    let items: Vec<(u64, [usize; 2])> = q.models.iter().enumerate().map(|(i, &mn)| (cfg.seed + i as u64, mn)).collect();
    let res = exec.map(items.clone(), |(seed, [m, n])| -> Result<(Vec<boundary::CircleComparison>, f64, BoundaryInstance)> {
        let inst = BoundaryInstance::random(seed, m, n, q.unitary_scale, BumpProfile::new(BOUNDARY_PROFILE_N, q.eps_flat)?)?;
        let comps = q
            .mode_cutoffs
            .iter()
            .map(|&k| boundary::circle_comparison(&inst, q.circle_cutoff, q.t_points, &ModeBasis::new(k), &flow))
            .collect::<Result<Vec<_>>>()?;
        let fine = ModeBasis::new(*q.mode_cutoffs.last().expect("validated"));
        let alt = inst.with_profile(BumpProfile::new(BOUNDARY_PROFILE_N, q.alt_eps_flat)?);
        let (alt, _) = boundary::reduced_invariant(&alt, q.t_points, &fine, &flow)?;
        Ok((comps, alt.value, inst))
    });
    for ((seed, [m, n]), x) in items.into_iter().zip(res) {
        let name = format!("seed={seed}/m={m}/n={n}");
        match x {
            Ok((comps, alt, inst)) => {
                let rows = q.mode_cutoffs.iter().zip(&comps).map(|(&k, c)| TrendRow { level: k as f64, residual: c.mod1_residual }).collect();
                r.trend(Trend::new(format!("{name}/mod1"), rows));
                let c = comps.last().expect("validated");
                r.value(format!("{name}/xi_bar"), c.reduced.value);
                r.value(format!("{name}/xi_circle"), c.xi_circle);
                r.value(format!("{name}/full_identity"), c.full_identity);
                r.check(Check::below(format!("{name}/mod1"), c.mod1_residual, cfg.tol(q.mod1_tol)));
                r.check(Check::below(format!("{name}/full_identity"), spectral::mod1_distance(c.full_identity), cfg.tol(q.integer_tol)));
                r.check(Check::below(format!("{name}/psi"), (alt - c.reduced.value).abs(), cfg.tol(q.psi_tol)));
                if let Ok(s) = inst.circle_spectrum(q.circle_cutoff) {
                    r.provenance.extend(s.provenance().cloned());
                }
            }
            Err(e) => r.check(Check::failed(name, e.to_string())),
        }
    }
    conjugation(cfg, exec, &mut r);
    r
}

fn conjugation<E: Executor>(cfg: &SuiteConfig, exec: &E, r: &mut SuiteReport) {
    let c = &cfg.eta_equivalence.conjugation;
    let setup = BumpProfile::new(c.profile_n_theta, c.eps_flat).and_then(|p| BoundaryInstance::random(cfg.seed + CONJUGATION_SEED, 2, 1, 1.0, p));
    let inst = match setup {
        Ok(i) => i,
        Err(e) => {
            r.check(Check::failed("conjugation", e.to_string()));
            return;
        }
    };
    let res = exec.map(c.n_theta.clone(), |n| operators::conjugation_check(&inst.model, &inst.u, &inst.profile, n / 2, c.low_modes).map(|x| x.residual));
    let res: Result<Vec<f64>> = res.into_iter().collect();
    match res {
        Ok(v) => {
            let rows = c.n_theta.iter().zip(&v).map(|(&n, &x)| TrendRow { level: n as f64, residual: x }).collect();
            r.trend(Trend::new("conjugation", rows));
            let (coarse, fine) = (v[0], v[v.len() - 1]);
            r.check(Check::below("conjugation/residual", fine, cfg.tol(c.tol)));
            // the decrease from the coarsest to the finest grid, as a ratio against min_ratio
            r.check(Check::below("conjugation/decrease", c.min_ratio * fine / coarse, 1.0));
        }
        Err(e) => r.check(Check::failed("conjugation", e.to_string())),
    }
}

// ------------------------------------------------------------ sf squares

/// seed offset of the second endpoint unitary
const SQUARE_V_SEED: u64 = 100;

pub fn verify_sf_squares<E: Executor>(cfg: &SuiteConfig, exec: &E) -> SuiteReport {
    let q = &cfg.sf_squares;
    let mut r = SuiteReport::new("sf_squares", cfg.seed);
    let basis = ModeBasis::new(q.mode_cutoff);
    let flow = FlowOptions::default();
    let seeds: Vec<u64> = (0..q.squares as u64).map(|i| cfg.seed + i).collect();
    let res = exec.map(seeds.clone(), |seed| -> Result<Vec<(&'static str, boundary::SquareEdges, boundary::SquareEdges)>> {
        let inst = BoundaryInstance::random(seed, q.m, q.n, q.unitary_scale, BumpProfile::new(BOUNDARY_PROFILE_N, q.eps_flat)?)?;
        let v = inst.model.random_unitary(&mut ModelRng::seeded(SQUARE_V_SEED + seed), q.unitary_scale)?;
        // a rank-one projection inside the + grading block
        let (plus, _) = inst.model.grading_blocks()?;
        let e = plus.as_ref().submatrix(0, 0, plus.nrows(), 1).to_owned();
        let proj = &e * e.adjoint();
        let paths = [("geodesic", CoefficientPath::geodesic(&inst.u, &v)?), ("winding", CoefficientPath::winding(&inst.u, &proj))];
        paths
            .into_iter()
            .map(|(name, path)| {
                let bc = boundary::boundary_condition_square(&inst, &path, q.points, &basis, q.circle_cutoff, &flow)?;
                let def = boundary::deformation_square(&inst, &path, q.points, &basis, &flow)?;
                Ok((name, bc, def))
            })
            .collect()
    });
    for (seed, x) in seeds.into_iter().zip(res) {
        match x {
            Ok(v) => {
                for (path, bc, def) in v {
                    for (kind, sq) in [("boundary_condition", bc), ("deformation", def)] {
                        let name = format!("seed={seed}/{path}/{kind}");
                        for (edge, val) in [("bottom", sq.bottom), ("right", sq.right), ("top", sq.top), ("left", sq.left)] {
                            r.value(format!("{name}/{edge}"), val as f64);
                        }
                        r.check(Check::exact(name, sq.loop_sf()));
                    }
                }
            }
            Err(e) => r.check(Check::failed(format!("seed={seed}"), e.to_string())),
        }
    }
    r
}
