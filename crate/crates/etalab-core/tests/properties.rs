//! Invariants of the estimators and builders as properties over random
//! inputs.

use std::f64::consts::PI;

use proptest::prelude::*;

use etalab_core::ktheory::{cup_with_bott, BumpProfile};
use etalab_core::linalg::{self, Mat, C64};
use etalab_core::models::{random_hermitian, random_torus_unitary, ModelRng};
use etalab_core::operators::{build_pt, shifted_circle_spectrum, ModelBoundary};
use etalab_core::spectral::{self, spectral_flow, FlowOptions, SpectrumData};

/// `H(s) = H₀ + cos(2πs) H₁ + sin(2πs) H₂`, a closed loop in `s`
struct Loop {
    h: [Mat; 3],
}

impl Loop {
    fn new(seed: u64, n: usize) -> Self {
        let mut rng = ModelRng::seeded(seed);
        let h = [random_hermitian(&mut rng, n, 1.0), random_hermitian(&mut rng, n, 2.0), random_hermitian(&mut rng, n, 2.0)];
        Self { h }
    }

    fn at(&self, s: f64) -> Vec<f64> {
        let (c, sn) = ((2.0 * PI * s).cos(), (2.0 * PI * s).sin());
        let m = Mat::from_fn(self.h[0].nrows(), self.h[0].ncols(), |i, j| self.h[0][(i, j)] + self.h[1][(i, j)] * c + self.h[2][(i, j)] * sn);
        linalg::eigvalsh(&linalg::symmetrize(&m)).unwrap()
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn sf(l: &Loop, g: &[f64]) -> i64 {
    spectral_flow(|s| Ok(l.at(s)), g, &FlowOptions::default()).unwrap().sf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eta_is_scale_invariant(b in 0.1f64..0.9, c in prop::sample::select(vec![0.5, 2.0])) {
        let spec = SpectrumData::new(shifted_circle_spectrum(b, 400), None, None).unwrap();
        let e = spectral::eta_default(&spec);
        let es = spectral::eta_default(&spec.scaled(c));
        prop_assert!((e.value - es.value).abs() <= 1e-6 + e.error + es.error, "{} vs {}", e.value, es.value);
    }

    #[test]
    fn eta_oracle_holds_across_b(b in 0.1f64..0.9) {
        let spec = SpectrumData::new(shifted_circle_spectrum(b, 2000), None, None).unwrap();
        let e = spectral::eta_default(&spec);
        prop_assert!((e.value - (1.0 - 2.0 * b)).abs() < 1e-3);
    }

    #[test]
    fn spectral_flow_is_additive_and_antisymmetric(seed in 0u64..1000, split in 0.2f64..0.8) {
        let l = Loop::new(seed, 4);
        let whole = sf(&l, &grid(0.0, 0.7, 15));
        let a = sf(&l, &grid(0.0, split * 0.7, 9));
        let b = sf(&l, &grid(split * 0.7, 0.7, 9));
        prop_assert_eq!(whole, a + b);
        // reversal, parametrized by r = 0.7 − s
        let rev = spectral_flow(|r| Ok(l.at(0.7 - r)), &grid(0.0, 0.7, 15), &FlowOptions::default()).unwrap().sf;
        prop_assert_eq!(rev, -whole);
    }

    #[test]
    fn closed_loops_have_no_flow(seed in 0u64..1000) {
        let l = Loop::new(seed, 5);
        prop_assert_eq!(sf(&l, &grid(0.0, 1.0, 17)), 0);
    }

    #[test]
    fn boundary_conditions_are_projections(seed in 0u64..1000, t in 0.0f64..std::f64::consts::FRAC_PI_4) {
        let mut rng = ModelRng::seeded(seed);
        let model = ModelBoundary::random(&mut rng, 2, 1, 1.0).unwrap();
        let u = model.random_unitary(&mut rng, 1.0).unwrap();
        let p = build_pt(&model, &u, t).unwrap();
        prop_assert!(linalg::projection_residual(p.matrix()) < 1e-12);
        prop_assert!(linalg::hermitian_residual(p.matrix()) < 1e-12);
        prop_assert_eq!(p.rank(), model.dim());
    }

    #[test]
    fn cup_products_are_projections(seed in 0u64..1000) {
        let profile = BumpProfile::new(64, 0.05).unwrap();
        let u = random_torus_unitary(&mut ModelRng::seeded(seed), &[16], 2, 2, 1.0).unwrap();
        let e = cup_with_bott(&u, &profile).unwrap();
        prop_assert!(e.max_projection_residual() < 1e-10);
        // rank 2 everywhere: the trace of e_U is the rank of U
        let tr = e.trace();
        prop_assert!(tr.values().iter().all(|z| (z - C64::new(2.0, 0.0)).norm() < 1e-10));
    }
}
