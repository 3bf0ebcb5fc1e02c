#![allow(dead_code)]

use iwave::params::{nondim, NondimParams, PhysicalParams};

/// ρ± = (1, 2), d± = (1, 2), c = 1, no vorticity.
pub fn base() -> PhysicalParams {
    PhysicalParams {
        rho_plus: 1.0,
        rho_minus: 2.0,
        d_plus: 1.0,
        d_minus: 2.0,
        omega_plus: 0.0,
        omega_minus: 0.0,
        sigma: 2.0,
        g: 4.0,
        c: 1.0,
    }
}

pub fn with_vorticity(p: PhysicalParams, wp: f64, wm: f64) -> PhysicalParams {
    PhysicalParams {
        omega_plus: wp,
        omega_minus: wm,
        ..p
    }
}

/// Physical parameters tuned so that α = α₀ + ε² and β = β₀ + beta_excess.
pub fn tuned(p: PhysicalParams, epsilon: f64, beta_excess: f64) -> PhysicalParams {
    let np = nondim(&p).unwrap();
    PhysicalParams::from_alpha_beta(&p, np.alpha0 + epsilon * epsilon, np.beta0 + beta_excess).unwrap()
}

pub fn tuned_np(p: PhysicalParams, epsilon: f64, beta_excess: f64) -> NondimParams {
    nondim(&tuned(p, epsilon, beta_excess)).unwrap()
}

/// Nondimensional data with α exactly α₀.
pub fn critical_np(varrho: f64, d: f64, sp: f64, sm: f64, beta: f64) -> NondimParams {
    let probe = NondimParams::from_parts(0.0, beta, varrho, d, sp, sm);
    NondimParams::from_parts(probe.alpha0, beta, varrho, d, sp, sm)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
