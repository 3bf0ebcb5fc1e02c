mod common;

use iwave::reduced_dynamics::{
    homoclinic, homoclinic_derivative, integrate, reduced_hamiltonian, vector_field, ReducedState,
    ReducedSystem,
};
use nalgebra::Matrix2;
use proptest::prelude::*;

fn st(q: f64, p: f64) -> ReducedState {
    ReducedState { q, p, x: 0.0 }
}

#[test]
fn equilibria_are_fixed() {
    for k in [-2.0, 0.3, 1.0, 5.0] {
        let sys = ReducedSystem::new(k);
        assert_eq!(vector_field(&st(0.0, 0.0), &sys), (0.0, 0.0));
        let qc = sys.center_equilibrium().unwrap();
        assert!((qc + 2.0 / (3.0 * k)).abs() < 1e-16);
        let (dq, dp) = vector_field(&st(qc, 0.0), &sys);
        assert_eq!(dq, 0.0);
        assert!(dp.abs() < 1e-15);
    }
    assert_eq!(vector_field(&st(1.0, 1.0), &ReducedSystem::new(2.0)), (1.0, 4.0));
}

#[test]
fn homoclinic_at_origin_of_x() {
    let s = homoclinic(0.0, &ReducedSystem::new(1.0)).unwrap();
    assert_eq!((s.q, s.p), (-1.0, 0.0));
    let far = homoclinic(60.0, &ReducedSystem::new(1.0)).unwrap();
    assert!(far.q.abs() < 1e-25 && far.p.abs() < 1e-25);
    assert!(homoclinic(0.0, &ReducedSystem::new(0.0)).is_err());
}

#[test]
fn homoclinic_solves_truncated_system() {
    // Derivatives of sech² written independently: d/dX sech²(X/2) = −sech²(X/2)tanh(X/2).
    for k in [-3.0, -0.7, 0.4, 1.0, 2.5] {
        let sys = ReducedSystem::new(k);
        let mut worst: f64 = 0.0;
        for i in 0..4001 {
            let x = -20.0 + 40.0 * i as f64 / 4000.0;
            let s = homoclinic(x, &sys).unwrap();
            let (dq, dp) = homoclinic_derivative(x, &sys).unwrap();
            let (fq, fp) = vector_field(&s, &sys);
            worst = worst.max((dq - fq).abs()).max((dp - fp).abs());
        }
        assert!(worst <= 1e-12, "K={k}: {worst}");
    }
}

#[test]
fn closed_form_derivative_matches_finite_difference() {
    let sys = ReducedSystem::new(1.3);
    for x in [-4.0, -0.5, 0.0, 1.7, 6.0] {
        let h = 1e-5;
        let a = homoclinic(x + h, &sys).unwrap();
        let b = homoclinic(x - h, &sys).unwrap();
        let (dq, dp) = homoclinic_derivative(x, &sys).unwrap();
        assert!(((a.q - b.q) / (2.0 * h) - dq).abs() < 1e-9);
        assert!(((a.p - b.p) / (2.0 * h) - dp).abs() < 1e-9);
    }
}

#[test]
fn hamiltonian_vanishes_on_homoclinic() {
    for k in [-1.5, 0.8, 3.0] {
        let sys = ReducedSystem::new(k);
        for x in [0.0, 1.0, 5.0] {
            let s = homoclinic(x, &sys).unwrap();
            assert!(reduced_hamiltonian(&s, &sys).abs() <= 1e-14);
        }
    }
    assert_eq!(reduced_hamiltonian(&st(0.0, 0.0), &ReducedSystem::new(1.0)), 0.0);
}

#[test]
fn rk4_shadows_homoclinic() {
    for k in [-2.0, 0.5, 1.0] {
        let sys = ReducedSystem::new(k);
        let start = homoclinic(-15.0, &sys).unwrap();
        let traj = integrate(start, &sys, 15.0, 1e-3).unwrap();
        let end = traj.last();
        let exact = homoclinic(15.0, &sys).unwrap();
        assert_eq!(end.x, 15.0);
        let err = (end.q - exact.q).abs().max((end.p - exact.p).abs());
        assert!(err <= 1e-6, "K={k}: {err}");
        assert!(traj.energy_drift() <= 1e-10, "drift {}", traj.energy_drift());
    }
}

#[test]
fn energy_drift_over_long_span() {
    let sys = ReducedSystem::new(1.0);
    // periodic orbit inside the homoclinic loop
    let qc = sys.center_equilibrium().unwrap();
    let traj = integrate(ReducedState { q: qc * 1.3, p: 0.0, x: -20.0 }, &sys, 20.0, 1e-3).unwrap();
    assert!(traj.energy_drift() <= 1e-10, "{}", traj.energy_drift());
}

#[test]
fn origin_stays_put() {
    let sys = ReducedSystem::new(1.0);
    let traj = integrate(st(0.0, 0.0), &sys, 10.0, 1e-3).unwrap();
    assert!(traj.states.iter().all(|s| s.q == 0.0 && s.p == 0.0));
}

#[test]
fn time_reversal_returns_start() {
    let sys = ReducedSystem::new(0.9);
    let s0 = homoclinic(-2.0, &sys).unwrap();
    let fwd = integrate(s0, &sys, 3.0, 1e-3).unwrap();
    let back = integrate(*fwd.last(), &sys, -2.0, 1e-3).unwrap();
    let e = back.last();
    assert!((e.q - s0.q).abs() < 1e-10 && (e.p - s0.p).abs() < 1e-10);
}

#[test]
fn linearization_at_equilibria() {
    for k in [-1.0, 0.6, 2.0] {
        let sys = ReducedSystem::new(k);
        let numerical = |q0: f64| {
            let h = 1e-6;
            let col = |dq: f64, dp: f64| {
                let a = vector_field(&st(q0 + dq, dp), &sys);
                let b = vector_field(&st(q0 - dq, -dp), &sys);
                ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h))
            };
            let c1 = col(h, 0.0);
            let c2 = col(0.0, h);
            Matrix2::new(c1.0, c2.0, c1.1, c2.1)
        };
        let saddle = numerical(0.0).complex_eigenvalues();
        let mut re: Vec<f64> = saddle.iter().map(|l| l.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 1.0).abs() < 1e-10 && (re[1] - 1.0).abs() < 1e-10);
        assert!(saddle.iter().all(|l| l.im.abs() < 1e-10));
        let center = numerical(sys.center_equilibrium().unwrap()).complex_eigenvalues();
        for l in center.iter() {
            assert!(l.re.abs() < 1e-10);
            assert!((l.im.abs() - 1.0).abs() < 1e-10);
        }
        let j = sys.jacobian(sys.center_equilibrium().unwrap());
        assert!((j[1][0] + 1.0).abs() < 1e-14);
    }
}

#[test]
fn trajectory_csv() {
    let sys = ReducedSystem::new(1.0);
    let t = integrate(homoclinic(-1.0, &sys).unwrap(), &sys, 1.0, 0.5).unwrap();
    let csv = t.to_csv();
    assert!(csv.starts_with("X,Q,P,H\n"));
    assert_eq!(csv.lines().count(), 6);
}

proptest! {
    #[test]
    fn homoclinic_symmetry_and_sign(k in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], x in 0.0f64..30.0) {
        let sys = ReducedSystem::new(k);
        let a = homoclinic(x, &sys).unwrap();
        let b = homoclinic(-x, &sys).unwrap();
        prop_assert_eq!(a.q, b.q);
        prop_assert_eq!(a.p, -b.p);
        if a.q != 0.0 {
            prop_assert_eq!(a.q.signum(), -k.signum());
        }
    }
}
