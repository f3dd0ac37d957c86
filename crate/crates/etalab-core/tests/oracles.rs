//! Closed-form oracles and frozen reference values through the public API.

use etalab_core::ktheory::{lemma_id_closed_form, lemma_id_integral, tch_unitary, BumpProfile, K_MAX};
use etalab_core::operators::{build_shifted_circle, conjugation_check};
use etalab_core::spectral::{self, spectral_flow, spectral_flow_endpoints, FlowOptions};
use etalab_core::verify::boundary::BoundaryInstance;
use etalab_core::verify::instances::{QwzProjection, TorusPath};

fn sorted(b: f64) -> Vec<f64> {
    spectral::sorted_eigenvalues(&build_shifted_circle(b, 8).unwrap()).unwrap()
}

#[test]
fn bump_identity_closed_form() {
    // (k−1)!² / (2k−1)!
    let want = [1.0, 1.0 / 6.0, 1.0 / 30.0, 1.0 / 140.0, 1.0 / 630.0];
    let p = BumpProfile::new(512, 0.05).unwrap();
    for (k, w) in (1..=5u32).zip(want) {
        assert_eq!(lemma_id_closed_form(k), w);
        assert!((lemma_id_integral(&p, k).unwrap() - w).abs() < 1e-10);
    }
}

#[test]
fn shifted_circle_flow_and_reversal() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let opts = FlowOptions::default();
    // b: 0.25 → 1.25 moves the branch 2π(b − 1) up through zero at b = 1
    let up = spectral_flow(|s| Ok(sorted(0.25 + s)), &grid, &opts).unwrap();
    assert_eq!(up.sf, 1);
    let down = spectral_flow(|s| Ok(sorted(1.25 - s)), &grid, &opts).unwrap();
    assert_eq!(down.sf, -1);
    // on the truncated ladder the flow is also the change of the negative count
    assert_eq!(spectral_flow_endpoints(&sorted(0.25), &sorted(1.25), opts.eps_ker).unwrap(), up.sf);
}

#[test]
fn torus_transgression_reference() {
    // frozen from a run at Y grid 32², N_s = 33; closed form (sin 2πκ)/2π − κ = −1/2
    let path = TorusPath { projection: QwzProjection { mass: 1.0 }, kappa: 0.5 };
    let v = tch_unitary(&path.unitary_path(32, 33).unwrap(), K_MAX).unwrap().integrate().unwrap();
    assert!((v.re - -0.499_998_616_5).abs() < 1e-9, "{v}");
    assert!(v.im.abs() < 1e-7, "{v}");
}

#[test]
fn conjugation_reference() {
    // frozen coarse-grid residual of the conjugation identity (seed 12, K = 32)
    let inst = BoundaryInstance::random(12, 2, 1, 1.0, BumpProfile::new(256, 0.02).unwrap()).unwrap();
    let r = conjugation_check(&inst.model, &inst.u, &inst.profile, 32, 8).unwrap();
    assert!((r.residual - 7.989e-3).abs() < 1e-5, "{}", r.residual);
}
