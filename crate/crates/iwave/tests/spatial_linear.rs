mod common;

use common::critical_np;
use iwave::dispersion;
use iwave::params::NondimParams;
use iwave::spatial_linear::{
    assemble, jordan_chain_check, jordan_e1, jordan_e2, kernel_dimension, spectrum,
    symplectic_form, dispersion_mismatch, StateVector,
};
use proptest::prelude::*;

fn shear_cases() -> Vec<NondimParams> {
    vec![
        critical_np(0.5, 2.0, 0.0, 0.0, 1.2),
        critical_np(0.5, 2.0, 0.2, 0.0, 1.2),
        critical_np(0.8, 0.7, 0.3, -0.4, 0.9),
        critical_np(1.0, 1.0, -0.5, 0.6, 2.0),
    ]
}

#[test]
fn jordan_chain_at_criticality() {
    for np in shear_cases() {
        let r = jordan_chain_check(&np, 64).unwrap();
        assert!(r.kernel_residual <= 1e-8, "{r:?}");
        assert!(r.chain_residual <= 1e-8, "{r:?}");
        assert!(r.boundary_residual <= 1e-8, "{r:?}");
        assert!((r.pairing - np.beta_star).abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn jordan_chain_rejects_off_critical() {
    let np = critical_np(0.5, 2.0, 0.1, 0.0, 1.2);
    assert!(jordan_chain_check(&np.with_alpha(np.alpha0 + 1e-3), 64).is_err());
}

#[test]
fn e1_is_not_in_kernel_off_criticality() {
    // Only the γ component picks up α − α₀.
    let np = critical_np(0.6, 1.5, 0.3, -0.2, 1.0);
    let shifted = np.with_alpha(np.alpha0 + 0.01);
    let op = assemble(&shifted, 32).unwrap();
    let l = op.apply(&jordan_e1(&shifted, &op.grid));
    assert!((l.gamma - 0.01).abs() < 1e-12);
    assert!(l.eta.abs() < 1e-12);
}

#[test]
fn symplectic_form_is_antisymmetric() {
    let np = critical_np(0.6, 1.5, 0.3, -0.2, 1.0);
    let op = assemble(&np, 24).unwrap();
    let e1 = jordan_e1(&np, &op.grid);
    let e2 = jordan_e2(&np, &op.grid);
    let a = symplectic_form(&op.grid, &e1, &e2);
    let b = symplectic_form(&op.grid, &e2, &e1);
    assert!((a + b).abs() < 1e-14);
    assert_eq!(symplectic_form(&op.grid, &e1, &e1), 0.0);
}

#[test]
fn double_zero_eigenvalue_at_criticality() {
    for np in shear_cases() {
        let op = assemble(&np, 64).unwrap();
        let s = spectrum(&op, 10.0).unwrap();
        let small: Vec<_> = s.complex().into_iter().filter(|l| l.norm() < 1e-5).collect();
        assert_eq!(small.len(), 2, "{small:?}");
        assert_eq!(kernel_dimension(&op, 1e-10).unwrap(), 1);
    }
}

#[test]
fn real_pair_above_criticality() {
    let eps: f64 = 0.05;
    let np = critical_np(0.5, 2.0, 0.2, -0.1, 1.3);
    let np = np.with_alpha(np.alpha0 + eps * eps);
    let op = assemble(&np, 64).unwrap();
    let s = spectrum(&op, 10.0).unwrap();
    let mu_expected = eps / np.beta_star.sqrt();
    let real_small: Vec<f64> = s
        .complex()
        .into_iter()
        .filter(|l| l.im.abs() < 1e-9 && l.re.abs() < 0.5)
        .map(|l| l.re)
        .collect();
    assert_eq!(real_small.len(), 2, "{real_small:?}");
    let mu = real_small.iter().fold(0.0_f64, |m, x| m.max(*x));
    assert!((real_small.iter().sum::<f64>()).abs() < 1e-10);
    // μ = ε/√β* + O(ε²)
    assert!((mu - mu_expected).abs() < 2.0 * eps * eps, "{mu} vs {mu_expected}");
    let eps2 = eps / 2.0;
    let np2 = np.with_alpha(np.alpha0 + eps2 * eps2);
    let s2 = spectrum(&assemble(&np2, 64).unwrap(), 10.0).unwrap();
    let mu2 = s2
        .complex()
        .into_iter()
        .filter(|l| l.im.abs() < 1e-9 && l.re > 0.0 && l.re < 0.5)
        .map(|l| l.re)
        .fold(f64::INFINITY, f64::min);
    let e1 = (mu - mu_expected).abs();
    let e2 = (mu2 - eps2 / np.beta_star.sqrt()).abs();
    assert!(e1 / e2 > 3.0, "error ratio {}", e1 / e2);
}

#[test]
fn imaginary_eigenvalues_match_dispersion_roots() {
    let cases = [
        critical_np(0.5, 2.0, 0.0, 0.0, 0.0).with_beta(0.4),
        critical_np(0.7, 1.2, 0.3, -0.2, 0.0).with_beta(0.2),
        {
            let np = critical_np(0.5, 2.0, 0.1, 0.1, 0.0).with_beta(1.5);
            np.with_alpha(np.alpha0 - 0.3)
        },
    ];
    for np in cases {
        let op = assemble(&np, 64).unwrap();
        let s = spectrum(&op, 10.0).unwrap();
        let roots = dispersion::find_roots(&np, 10.0, 20_001).unwrap();
        assert!(roots.iter().any(|r| *r > 0.1), "{roots:?}");
        let (e2r, r2e) = dispersion_mismatch(&s, &np).unwrap();
        assert!(e2r <= 1e-6 && r2e <= 1e-6, "{e2r} {r2e}");
    }
}

#[test]
fn spectrum_has_quadruple_symmetry() {
    for np in shear_cases() {
        let np = np.with_alpha(np.alpha0 + 0.01);
        let s = spectrum(&assemble(&np, 64).unwrap(), 10.0).unwrap();
        assert!(s.quadruple_defect(9.0) <= 1e-6);
    }
}

#[test]
fn eigenvalues_converge_under_refinement() {
    let np = critical_np(0.5, 2.0, 0.2, -0.1, 1.3);
    let np = np.with_alpha(np.alpha0 + 0.01);
    let a = spectrum(&assemble(&np, 64).unwrap(), 10.0).unwrap().complex();
    let b = spectrum(&assemble(&np, 128).unwrap(), 10.0).unwrap().complex();
    for l in a.iter().filter(|l| l.norm() < 9.0) {
        let d = b.iter().map(|m| (m - l).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-8, "{l} moved {d}");
    }
}

#[test]
fn eigenvectors_satisfy_interface_condition() {
    // The interface Neumann condition is not imposed as a row; check it holds.
    let np = critical_np(0.5, 2.0, 0.2, -0.1, 1.3);
    let np = np.with_alpha(np.alpha0 + 0.01);
    let op = assemble(&np, 48).unwrap();
    let (lred, t) = op.reduced().unwrap();
    let s = spectrum(&op, 10.0).unwrap();
    let mu = s.complex().into_iter().find(|l| l.re > 0.05 && l.im.abs() < 1e-9).unwrap().re;
    // inverse iteration on (L − μ' I) for the real eigenvector
    let shifted = &lred - nalgebra::DMatrix::identity(lred.nrows(), lred.nrows()) * (mu * (1.0 + 1e-9));
    let lu = shifted.lu();
    let mut v = nalgebra::DVector::from_element(lred.nrows(), 1.0);
    for _ in 0..5 {
        v = lu.solve(&v).unwrap();
        v /= v.norm();
    }
    let state: StateVector = op.lift(&v, &t);
    let scale = state.to_vector().amax();
    let br = op.boundary_residuals(&state);
    assert!(br.max_abs() / scale < 1e-8, "{br:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chain_holds_for_random_parameters(
        vr in 0.1f64..1.0, d in 0.2f64..4.0, sp in -1.0f64..1.0, sm in -1.0f64..1.0, bex in 0.05f64..2.0
    ) {
        let probe = critical_np(vr, d, sp, sm, 0.0);
        let np = critical_np(vr, d, sp, sm, probe.beta0 + bex);
        let r = jordan_chain_check(&np, 32).unwrap();
        prop_assert!(r.kernel_residual <= 1e-8);
        prop_assert!(r.chain_residual <= 1e-8);
        prop_assert!((r.pairing - np.beta_star).abs() <= 1e-10);
    }
}
