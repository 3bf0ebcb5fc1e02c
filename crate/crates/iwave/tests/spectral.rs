mod common;

use common::{base, rel_err, tuned, with_vorticity};
use iwave::dispersion::residual;
use iwave::params::{jump, nondim, PhysicalParams};
use iwave::spectral::*;
use proptest::prelude::*;

fn example_tau_params() -> PhysicalParams {
    // g⟦ρ⟧ = −9.81, ϱ = 1/2, d = 2 so α₀ = 1; c² chosen for α = 1.1.
    let c = (9.81f64 / 2.2).sqrt();
    let p = PhysicalParams {
        rho_plus: 1.0,
        rho_minus: 2.0,
        d_plus: 1.0,
        d_minus: 2.0,
        omega_plus: 0.0,
        omega_minus: 0.0,
        sigma: 1.0,
        g: 9.81,
        c,
    };
    let np = nondim(&p).unwrap();
    PhysicalParams::from_alpha_beta(&p, np.alpha, np.beta0 + 0.2).unwrap()
}

/// d/dk of the nondimensional dispersion residual.
fn residual_slope(k: f64, varrho: f64, d: f64, beta: f64) -> f64 {
    let term = |a: f64| {
        let ak = a * k;
        1.0 / ak.tanh() - ak / ak.sinh().powi(2)
    };
    varrho * term(1.0) + term(d) - 2.0 * beta * k
}

#[test]
fn limiting_operator_has_three_bound_states() {
    let r = limiting_spectrum(80.0, 1024).unwrap();
    assert_eq!(r.eigenvalues.len(), 3, "{:?}", r.eigenvalues);
    for (got, want) in r.eigenvalues.iter().zip([-1.25, 0.0, 0.75]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert_eq!(r.essential_edge, 1.0);
    assert_eq!(r.morse_index, 1);
    assert!(r.eigenvalues.iter().all(|v| *v < r.essential_edge));
    assert!(r.zero_mode_correlation.unwrap() >= 1.0 - 1e-8);
    assert_eq!((r.domain_length, r.modes), (Some(80.0), Some(1024)));
}

#[test]
fn limiting_spectrum_is_stable_under_refinement() {
    let coarse = limiting_spectrum(80.0, 1024).unwrap();
    let fine = limiting_spectrum(160.0, 2048).unwrap();
    assert_eq!(coarse.eigenvalues.len(), fine.eigenvalues.len());
    for (a, b) in coarse.eigenvalues.iter().zip(&fine.eigenvalues) {
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }
}

#[test]
fn limiting_spectrum_rejects_small_domains() {
    assert!(limiting_spectrum(40.0, 1024).is_err());
    assert!(limiting_spectrum(80.0, 512).is_err());
    assert!(limiting_spectrum(80.0, 1000).is_err());
    assert!(limiting_spectrum(f64::NAN, 1024).is_err());
}

#[test]
fn eigenfunction_csv_has_one_column_per_mode() {
    let r = limiting_spectrum(80.0, 1024).unwrap();
    let csv = eigenfunction_csv(&r);
    assert_eq!(csv.lines().count(), 1025);
    assert_eq!(csv.lines().next().unwrap(), "y,mode0,mode1,mode2");
}

#[test]
fn symbol_vanishes_at_criticality() {
    let p = tuned(with_vorticity(base(), 0.3, -0.4), 0.1, 0.5);
    let np = nondim(&p).unwrap();
    let critical = PhysicalParams::from_alpha_beta(&p, np.alpha0, np.beta).unwrap();
    assert!(qc0_symbol(0.0, &critical).abs() < 1e-12);
}

#[test]
fn symbol_at_zero_equals_strong_tension_tau() {
    for p in [tuned(base(), 0.1, 0.5), tuned(with_vorticity(base(), -0.2, 0.5), 0.3, 0.1)] {
        let np = nondim(&p).unwrap();
        let expected = -p.g * jump(p.rho_plus, p.rho_minus) * (1.0 - np.alpha0 / np.alpha);
        assert!(rel_err(qc0_symbol(0.0, &p), expected) < 1e-12);
        let tau = tau_star(&p).unwrap();
        assert!(tau.strong_tension);
        assert!(rel_err(tau.value, expected) < 1e-14);
    }
}

#[test]
fn symbol_is_the_scaled_dispersion_residual() {
    let p = tuned(with_vorticity(base(), 0.3, -0.4), 0.2, -0.3);
    let np = nondim(&p).unwrap();
    for xi in [1e-6, 1e-3, 0.1, 0.7, 2.0, 9.0] {
        let expected = p.g * jump(p.rho_plus, p.rho_minus) * residual(p.d_plus * xi, &np) / np.alpha;
        assert!((qc0_symbol(xi, &p) - expected).abs() < 1e-10 * expected.abs().max(1.0), "ξ = {xi}");
    }
}

#[test]
fn tau_star_matches_worked_example() {
    let tau = tau_star(&example_tau_params()).unwrap();
    assert!((tau.value - 9.81 * (1.0 - 1.0 / 1.1)).abs() < 1e-12);
    assert!((tau.value - 0.891818).abs() < 1e-6);
}

#[test]
fn tau_star_closes_at_criticality() {
    let taus: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&eps| tau_star(&tuned(base(), eps, 0.5)).unwrap().value)
        .collect();
    assert!(taus.iter().all(|t| *t > 0.0));
    assert!(taus[0] > taus[1] && taus[1] > taus[2] && taus[2] < 1e-5, "{taus:?}");
}

#[test]
fn weak_tension_tau_matches_stationary_point_of_symbol() {
    for (wp, wm, excess) in [(0.0, 0.0, -0.5), (0.3, -0.2, -0.3), (-0.4, 0.1, -0.6)] {
        let p = tuned(with_vorticity(base(), wp, wm), 0.1, excess);
        let np = nondim(&p).unwrap();
        let tau = tau_star(&p).unwrap();
        assert!(!tau.strong_tension);
        // Oracle: bisection on the analytic slope of the residual.
        let slope = |k: f64| residual_slope(k, np.varrho, np.d_ratio, np.beta);
        let (mut lo, mut hi) = (1e-3, 1e3);
        assert!(slope(lo) > 0.0 && slope(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k_star = 0.5 * (lo + hi);
        let expected = p.g * jump(p.rho_plus, p.rho_minus) * residual(k_star, &np) / np.alpha;
        assert!((tau.value - expected).abs() < 1e-8, "{} vs {expected}", tau.value);
        assert!((tau.grid_minimum - tau.value).abs() < 1e-8);
        let strong_formula = -p.g * jump(p.rho_plus, p.rho_minus) * (1.0 - np.alpha0 / np.alpha);
        assert!(tau.value < strong_formula);
    }
}

#[test]
fn tau_star_requires_positive_alpha() {
    let p = PhysicalParams { rho_plus: 2.0, ..base() };
    assert!(tau_star(&p).is_err());
}

#[test]
fn flat_spectrum_has_no_eigenvalues() {
    let p = tuned(base(), 0.1, 0.5);
    let r = qc0_spectrum(&p).unwrap();
    assert!(r.eigenvalues.is_empty());
    assert_eq!(r.morse_index, 0);
    assert!(rel_err(r.essential_edge, tau_star(&p).unwrap().value) < 1e-15);
}

#[test]
fn rescaled_symbol_tends_to_limit_quadratically() {
    let base_p = with_vorticity(base(), 0.3, -0.2);
    let kappa = 1.3;
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| {
            let p = tuned(base_p, eps, 0.7);
            (rescaled_symbol(kappa, &p).unwrap() - (1.0 + 0.7 * kappa * kappa)).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{errors:?}");
    }
}

#[test]
fn scaled_estimate_matches_arithmetic() {
    let p = PhysicalParams { rho_minus: 1.0, rho_plus: 0.5, d_minus: 1.0, ..base() };
    let p = tuned(p, 0.1, 0.5);
    let estimate = scaled_spectrum_estimate(&p).unwrap();
    assert!((estimate - 0.0125 * p.c * p.c).abs() < 1e-15);
    let half = scaled_spectrum_estimate(&tuned(p, 0.05, 0.5)).unwrap();
    // Same ε²c² bookkeeping at half the amplitude.
    let c_ratio = (tuned(p, 0.05, 0.5).c / p.c).powi(2);
    assert!(rel_err(half, 0.25 * estimate * c_ratio) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn symbol_is_even_and_grows(
        wp in -1.0..1.0f64,
        wm in -1.0..1.0f64,
        eps in 0.05..0.5f64,
        excess in -0.5..2.0f64,
        xi in 0.0..20.0f64,
    ) {
        let raw = with_vorticity(base(), wp, wm);
        prop_assume!(nondim(&raw).unwrap().alpha0 > 0.0);
        let p = tuned(raw, eps, excess);
        let here = qc0_symbol(xi, &p);
        prop_assert!((here - qc0_symbol(-xi, &p)).abs() <= 1e-15 * here.abs().max(1.0));
        // Geometric ladder: eventually increasing without bound.
        let ladder: Vec<f64> = (0..8).map(|n| qc0_symbol(100.0 * 4f64.powi(n), &p)).collect();
        prop_assert!(ladder.windows(2).all(|w| w[1] > 3.0 * w[0]));
        prop_assert!(ladder[7] > 1e8);
    }

    #[test]
    fn scaled_estimate_is_positive(
        eps in 0.01..0.5f64,
        c in prop_oneof![Just(-1.0), Just(1.0)],
        excess in 0.01..2.0f64,
    ) {
        let p = tuned(PhysicalParams { c, ..base() }, eps, excess);
        prop_assert!(scaled_spectrum_estimate(&p).unwrap() > 0.0);
    }

    #[test]
    fn tau_star_never_exceeds_symbol_at_zero(
        wp in -1.0..1.0f64,
        wm in -1.0..1.0f64,
        excess in -0.7..1.0f64,
    ) {
        let raw = with_vorticity(base(), wp, wm);
        prop_assume!(nondim(&raw).unwrap().alpha0 > 0.0);
        let p = tuned(raw, 0.2, excess);
        let tau = tau_star(&p).unwrap();
        prop_assert!(tau.value <= qc0_symbol(0.0, &p) + 1e-12);
        for xi in [0.5, 1.0, 3.0, 10.0] {
            prop_assert!(tau.value <= qc0_symbol(xi, &p) + 1e-12);
        }
    }
}
