mod common;

use common::{base, tuned, with_vorticity};
use iwave::params::{nondim, PhysicalParams, Polarity};
use iwave::profile::{
    default_grid, leading_order, polarity, profile_from_reduced, symmetric_grid, ProfileOutcome,
};
use iwave::reduced_dynamics::ReducedSystem;

fn sech2(x: f64) -> f64 {
    let s = 1.0 / x.cosh();
    s * s
}

#[test]
fn amplitude_example() {
    // ϱ = 0.5, d = 2, ω = 0 gives 𝔅 = 0.25.
    let p = tuned(base(), 0.1, 0.25);
    let np = nondim(&p).unwrap();
    assert!((np.frak_b - 0.25).abs() < 1e-15);
    let w = leading_order(&p, Some(vec![0.0])).unwrap().wave().unwrap();
    assert!((w.eta[0] - 0.04).abs() < 1e-14);
    assert!((w.amplitude - 0.04).abs() < 1e-14);
    assert_eq!(w.polarity, Polarity::Elevation);
    // decay scale 2·1·0.5/0.1
    assert!((w.decay_scale - 10.0).abs() < 1e-12);
}

#[test]
fn decay_ratio_at_two_scales() {
    let p = tuned(with_vorticity(base(), 0.3, -0.1), 0.2, 0.7);
    let w = leading_order(&p, Some(vec![0.0])).unwrap().wave().unwrap();
    let x = 2.0 * w.decay_scale;
    let w2 = leading_order(&p, Some(vec![x])).unwrap().wave().unwrap();
    assert!((w2.eta[0] / w.eta[0] - sech2(2.0)).abs() < 1e-15);
    assert!((sech2(2.0) - 0.0706508).abs() < 1e-7);
}

#[test]
fn closed_form_against_independent_evaluation() {
    let p = tuned(with_vorticity(base(), -0.4, 0.25), 0.3, 0.5);
    let np = nondim(&p).unwrap();
    let eps = np.epsilon.unwrap();
    let grid = symmetric_grid(50.0, 201);
    let w = leading_order(&p, Some(grid.clone())).unwrap().wave().unwrap();
    for (x, e) in grid.iter().zip(&w.eta) {
        let arg = eps * x / (2.0 * p.d_plus * (np.beta - np.beta0).sqrt());
        let expected = p.d_plus * eps * eps * sech2(arg) / np.frak_b;
        assert!((e - expected).abs() <= 1e-15 * expected.abs().max(1e-300) * 10.0);
    }
}

#[test]
fn polarity_examples() {
    let elev = nondim(&base()).unwrap();
    assert!((elev.frak_b - 0.25).abs() < 1e-15);
    assert_eq!(polarity(&elev), Polarity::Elevation);
    let dep = nondim(&PhysicalParams { d_minus: 1.0, ..base() }).unwrap();
    assert!((dep.frak_b + 0.5).abs() < 1e-15);
    assert_eq!(polarity(&dep), Polarity::Depression);
    let degenerate = PhysicalParams {
        rho_plus: 0.25,
        rho_minus: 1.0,
        ..base()
    };
    assert_eq!(polarity(&nondim(&degenerate).unwrap()), Polarity::Degenerate);
    let p = tuned(degenerate, 0.1, 0.3);
    assert!(matches!(leading_order(&p, None).unwrap(), ProfileOutcome::Degenerate { .. }));
}

#[test]
fn depression_profile_is_negative() {
    let p = tuned(PhysicalParams { d_minus: 1.0, ..base() }, 0.15, 0.4);
    let w = leading_order(&p, None).unwrap().wave().unwrap();
    assert_eq!(w.polarity, Polarity::Depression);
    assert!(w.eta.iter().all(|e| *e < 0.0));
}

#[test]
fn preconditions() {
    assert!(leading_order(&tuned(base(), 0.1, -0.1), None).is_err());
    assert!(leading_order(&tuned(base(), 0.6, 0.3), None).is_err());
    let at_alpha0 = PhysicalParams::from_alpha_beta(&base(), 1.0, 1.5).unwrap();
    assert!(leading_order(&at_alpha0, None).is_err());
}

#[test]
fn reduced_route_agrees() {
    for (wp, wm, eps, bex, dm) in [
        (0.0, 0.0, 0.1, 0.25, 2.0),
        (0.3, -0.2, 0.05, 0.8, 2.0),
        (-0.5, 0.4, 0.3, 0.1, 1.0),
        (0.2, 0.6, 0.45, 1.7, 0.6),
    ] {
        let p = tuned(with_vorticity(PhysicalParams { d_minus: dm, ..base() }, wp, wm), eps, bex);
        let np = nondim(&p).unwrap();
        let sys = ReducedSystem::from_params(&np).unwrap();
        let a = leading_order(&p, None).unwrap().wave().unwrap();
        let b = profile_from_reduced(&sys, &p, None).unwrap().wave().unwrap();
        assert_eq!(a.polarity, b.polarity);
        let worst = a.eta.iter().zip(&b.eta).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-14 * a.amplitude.abs(), "{worst}");
        assert!((a.decay_scale - b.decay_scale).abs() <= 1e-13 * a.decay_scale);
    }
}

#[test]
fn flipping_k_flips_polarity() {
    let p = tuned(base(), 0.1, 0.3);
    let np = nondim(&p).unwrap();
    let sys = ReducedSystem::from_params(&np).unwrap();
    let flipped = ReducedSystem { coeff_k: -sys.coeff_k, ..sys };
    let a = profile_from_reduced(&sys, &p, None).unwrap().wave().unwrap();
    let b = profile_from_reduced(&flipped, &p, None).unwrap().wave().unwrap();
    assert_eq!(a.polarity, Polarity::Elevation);
    assert_eq!(b.polarity, Polarity::Depression);
}

#[test]
fn epsilon_scaling_is_exact() {
    let ladder = [0.4, 0.2, 0.1, 0.05];
    let profiles: Vec<_> = ladder
        .iter()
        .map(|e| leading_order(&tuned(with_vorticity(base(), 0.2, 0.1), *e, 0.5), None).unwrap().wave().unwrap())
        .collect();
    for w in profiles.windows(2) {
        assert!((w[0].amplitude / w[1].amplitude - 4.0).abs() < 1e-12);
        assert!((w[1].decay_scale / w[0].decay_scale - 2.0).abs() < 1e-12);
    }
}

#[test]
fn default_grid_shape_and_symmetry() {
    let p = tuned(base(), 0.2, 0.5);
    let w = leading_order(&p, None).unwrap().wave().unwrap();
    assert_eq!(w.x_grid.len(), 4096);
    assert_eq!(default_grid(&p).unwrap(), w.x_grid);
    assert!((w.x_grid[4095] - 10.0 * w.decay_scale).abs() < 1e-12);
    let n = w.eta.len();
    for i in 0..n {
        assert_eq!(w.eta[i], w.eta[n - 1 - i]);
    }
    // fraction of ∫η² captured on ±10 decay scales
    let dx = w.x_grid[1] - w.x_grid[0];
    let on_grid: f64 = w.eta.iter().map(|e| e * e).sum::<f64>() * dx;
    // ∫ sech⁴(x/D) dx = 4D/3
    let total = w.amplitude * w.amplitude * 4.0 * w.decay_scale / 3.0;
    assert!(on_grid / total > 1.0 - 1e-8);
    assert!(w.eta.iter().all(|e| *e > 0.0));
}

#[test]
fn emitters() {
    let p = tuned(base(), 0.2, 0.5);
    let w = leading_order(&p, Some(vec![-1.0, 0.0, 1.0])).unwrap().wave().unwrap();
    assert!(w.to_csv().starts_with("x,eta\n"));
    let m = w.metadata();
    assert_eq!(m["polarity"], "elevation");
    assert_eq!(m["n_points"], 3);
}

#[test]
fn polarity_matches_sign_of_b_on_sample() {
    let mut seen = (0, 0);
    for i in 0..100 {
        let t = i as f64 / 99.0;
        let p = PhysicalParams {
            rho_plus: 0.2 + 0.75 * t,
            rho_minus: 1.0,
            d_plus: 1.0,
            d_minus: 0.5 + 2.5 * ((7.0 * t).sin() * 0.5 + 0.5),
            omega_plus: (13.0 * t).cos() * 0.6,
            omega_minus: (5.0 * t).sin() * 0.6,
            ..base()
        };
        let p = match tuned_checked(p) {
            Some(p) => p,
            None => continue,
        };
        let np = nondim(&p).unwrap();
        let out = leading_order(&p, None).unwrap();
        match out {
            ProfileOutcome::Wave(w) => {
                assert_eq!(w.polarity, np.polarity());
                if np.frak_b > 0.0 {
                    seen.0 += 1;
                    assert!(w.eta.iter().all(|e| *e > 0.0));
                } else {
                    seen.1 += 1;
                    assert!(w.eta.iter().all(|e| *e < 0.0));
                }
            }
            ProfileOutcome::Degenerate { .. } => assert!(np.frak_b.abs() <= 1e-12),
        }
    }
    assert!(seen.0 > 10 && seen.1 > 10, "{seen:?}");
}

fn tuned_checked(p: PhysicalParams) -> Option<PhysicalParams> {
    let np = nondim(&p).ok()?;
    PhysicalParams::from_alpha_beta(&p, np.alpha0 + 0.01, np.beta0 + 0.3).ok()
}
