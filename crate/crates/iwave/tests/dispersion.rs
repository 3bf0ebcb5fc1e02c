mod common;

use common::critical_np;
use iwave::dispersion::{double_root_certificate, find_roots, k_coth, residual, sample_curve};
use iwave::params::NondimParams;
use proptest::prelude::*;

/// Independent evaluation with cosh/sinh, no series branch.
fn residual_oracle(k: f64, np: &NondimParams) -> f64 {
    let kc = |a: f64| k * (a * k).cosh() / (a * k).sinh();
    np.varrho * kc(1.0) + kc(np.d_ratio) + np.shear_plus * np.varrho - np.shear_minus - np.alpha
        - np.beta * k * k
}

fn sign_changes(np: &NondimParams, k_max: f64, n: usize) -> usize {
    let mut count = 0;
    let mut prev = residual_oracle(k_max / n as f64 * 0.5, np);
    for i in 1..=n {
        let r = residual_oracle(k_max * i as f64 / n as f64, np);
        if r.signum() != prev.signum() {
            count += 1;
        }
        prev = r;
    }
    count
}

#[test]
fn zero_at_criticality() {
    for (vr, d, sp, sm) in [(0.5, 2.0, 0.0, 0.0), (0.8, 0.7, 0.3, -0.2), (1.0, 1.0, -0.5, 0.4)] {
        let np = critical_np(vr, d, sp, sm, 1.3);
        assert!(residual(0.0, &np).abs() <= 1e-12);
        let shifted = np.with_alpha(np.alpha0 + 0.04);
        assert!((residual(0.0, &shifted) + 0.04).abs() <= 1e-14);
    }
}

#[test]
fn limit_matches_samples() {
    let np = critical_np(0.6, 1.7, 0.2, 0.1, 0.9);
    assert!((residual(1e-5, &np) - residual(0.0, &np)).abs() <= 1e-10);
    // series branch agrees with the direct form just below the switch
    for k in [9.9e-5, 5e-5, 1e-5] {
        assert!((residual(k, &np) - residual_oracle(k, &np)).abs() < 1e-11);
    }
    assert!((k_coth(0.0, 2.0) - 0.5).abs() < 1e-16);
}

#[test]
fn strong_tension_supercritical_alpha_has_no_roots() {
    let np = critical_np(0.5, 2.0, 0.1, -0.1, 0.0);
    let np = np.with_beta(np.beta0 + 0.3).with_alpha(np.alpha0 + 0.05);
    let roots = find_roots(&np, 20.0, 400).unwrap();
    assert!(roots.is_empty(), "{roots:?}");
    assert_eq!(sign_changes(&np, 20.0, 200_000), 0);
}

#[test]
fn strong_tension_below_alpha0_has_one_root() {
    // residual(0) = α₀ − α > 0 and residual → −∞, so one crossing.
    let np = critical_np(0.5, 2.0, 0.1, -0.1, 0.0);
    let np = np.with_beta(np.beta0 + 0.3).with_alpha(np.alpha0 - 0.05);
    let roots = find_roots(&np, 20.0, 400).unwrap();
    assert_eq!(roots.len(), 1);
    assert_eq!(sign_changes(&np, 20.0, 200_000), 1);
}

#[test]
fn weak_tension_has_nonzero_root() {
    let np = critical_np(0.5, 2.0, 0.0, 0.0, 0.0);
    let np = np.with_beta(np.beta0 - 0.3);
    let roots = find_roots(&np, 20.0, 400).unwrap();
    let nonzero: Vec<f64> = roots.iter().copied().filter(|r| *r > 1e-8).collect();
    assert!(!nonzero.is_empty());
    assert_eq!(nonzero.len(), sign_changes(&np, 20.0, 200_000));
    for r in &nonzero {
        assert!(residual(*r, &np).abs() <= 1e-12);
        assert!(residual_oracle(*r, &np).abs() <= 1e-11);
    }
    assert_eq!(roots[0], 0.0);
}

#[test]
fn critical_alpha_has_root_at_zero() {
    for beta in [0.2, 0.9, 3.0] {
        let np = critical_np(0.7, 1.3, 0.2, 0.3, beta);
        let roots = find_roots(&np, 10.0, 64).unwrap();
        assert_eq!(roots.first().copied(), Some(0.0));
    }
}

#[test]
fn find_roots_rejects_bad_arguments() {
    let np = critical_np(0.7, 1.3, 0.0, 0.0, 1.0);
    assert!(find_roots(&np, 10.0, 7).is_err());
    assert!(find_roots(&np, 0.0, 64).is_err());
}

#[test]
fn coarse_grid_near_tangency_is_reported() {
    // Place a shallow dip between two seeds: choose α so the residual just
    // touches below zero near its maximum on the weak-tension branch.
    let base = critical_np(0.5, 2.0, 0.0, 0.0, 0.0).with_beta(0.5);
    let ks: Vec<f64> = (1..20000).map(|i| i as f64 * 1e-3).collect();
    let (kmax, rmax) = ks
        .iter()
        .map(|&k| (k, residual(k, &base)))
        .fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    let np = base.with_alpha(base.alpha + rmax - 1e-7);
    // seeds at spacing 1 straddle the dip without a sign change
    let k_max = 8.0 * kmax.ceil();
    let res = find_roots(&np, k_max + 0.5, 9);
    let dense = sign_changes(&np, k_max + 0.5, 2_000_000);
    assert_eq!(dense, 2);
    assert!(res.is_err() || res.unwrap().len() >= 2);
}

#[test]
fn certificate_values() {
    let np = critical_np(0.5, 2.0, 0.2, 0.0, 0.0);
    let at_b0 = np.with_beta(np.beta0);
    let c = double_root_certificate(&at_b0).unwrap();
    assert!(c.residual_at_zero.abs() <= 1e-12);
    assert!(c.second_derivative.abs() <= 1e-15);
    assert!(c.degenerate_tangency);

    let above = np.with_beta(np.beta0 + 0.5);
    let c = double_root_certificate(&above).unwrap();
    assert!((c.second_derivative + 1.0).abs() <= 1e-14);
    assert!((c.second_derivative_fd - c.second_derivative).abs() <= 1e-6);

    assert!(double_root_certificate(&np.with_alpha(np.alpha0 + 1e-6)).is_err());
}

#[test]
fn certificate_against_series_oracle() {
    // k coth(ak) = 1/a + a k²/3 + O(k⁴): second derivative 2(ϱ + d)/3 − 2β.
    for (vr, d, beta) in [(0.3, 0.4, 0.1), (0.9, 3.0, 2.0), (1.0, 1.0, 0.6)] {
        let np = critical_np(vr, d, 0.1, -0.3, beta);
        let c = double_root_certificate(&np).unwrap();
        assert!((c.second_derivative - (2.0 * (vr + d) / 3.0 - 2.0 * beta)).abs() < 1e-14);
        assert!((c.second_derivative_fd - c.second_derivative).abs() <= 1e-6);
    }
}

#[test]
fn curve_csv_has_header_and_rows() {
    let np = critical_np(0.5, 2.0, 0.0, 0.0, 1.0);
    let curve = sample_curve(&np, 5.0, 11).unwrap();
    let csv = iwave::dispersion::curve_csv(&curve);
    assert!(csv.starts_with("k,residual\n"));
    assert_eq!(csv.lines().count(), 12);
}

fn np_strategy() -> impl Strategy<Value = NondimParams> {
    (0.1f64..1.0, 0.2f64..4.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..3.0, -0.5f64..0.5)
        .prop_map(|(vr, d, sp, sm, beta, da)| {
            let np = critical_np(vr, d, sp, sm, beta);
            np.with_alpha(np.alpha0 + da)
        })
}

proptest! {
    #[test]
    fn residual_is_even(np in np_strategy(), k in 0.0f64..30.0) {
        prop_assert_eq!(residual(k, &np), residual(-k, &np));
    }

    #[test]
    fn roots_are_accurate_and_sorted(np in np_strategy()) {
        if let Ok(roots) = find_roots(&np, 15.0, 300) {
            for w in roots.windows(2) {
                prop_assert!(w[1] - w[0] > 1e-8);
            }
            for r in &roots {
                prop_assert!(residual(*r, &np).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn strong_tension_above_alpha0_is_single_signed(
        vr in 0.1f64..1.0, d in 0.2f64..4.0, sp in -1.0f64..1.0, sm in -1.0f64..1.0,
        bex in 0.0f64..2.0, da in 0.0f64..0.5
    ) {
        let np = critical_np(vr, d, sp, sm, 0.0);
        let np = np.with_beta(np.beta0 + bex).with_alpha(np.alpha0 + da);
        for i in 1..=5000 {
            let k = 20.0 * i as f64 / 5000.0;
            prop_assert!(residual(k, &np) < 0.0);
        }
    }
}
