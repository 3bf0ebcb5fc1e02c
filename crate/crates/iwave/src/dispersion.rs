//! Linear dispersion relation in nondimensional form, real root finding and
//! the k = 0 double-root certificate.
//!
//! The relation is written with the density ratio ϱ and depth ratio d:
//! ϱ k coth k + k coth(kd) + (shear) − α − βk². Writing it instead with
//! ρ±/ρ₋ and coth(d±k/d₊) gives the same function after scaling by d₊.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::NondimParams;

pub const ROOT_TOL: f64 = 1e-12;
pub const DEDUP_TOL: f64 = 1e-8;
pub const ALPHA_CRITICAL_TOL: f64 = 1e-12;

/// k·coth(a·k), with the removable singularity at k = 0 filled in.
pub fn k_coth(k: f64, a: f64) -> f64 {
    let ak = a * k;
    if k.abs() < 1e-4 {
        let k2 = k * k;
        let a2 = a * a;
        1.0 / a + a * k2 / 3.0 - a * a2 * k2 * k2 / 45.0 + 2.0 * a2 * a2 * a * k2 * k2 * k2 / 945.0
    } else {
        k / ak.tanh()
    }
}

pub fn shear_offset(np: &NondimParams) -> f64 {
    np.shear_plus * np.varrho - np.shear_minus
}

pub fn residual(k: f64, np: &NondimParams) -> f64 {
    np.varrho * k_coth(k, 1.0) + k_coth(k, np.d_ratio) + shear_offset(np) - np.alpha - np.beta * k * k
}

pub fn find_roots(np: &NondimParams, k_max: f64, n_seeds: usize) -> Result<Vec<f64>> {
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::invalid("k_max must be positive and finite"));
    }
    if n_seeds < 8 {
        return Err(Error::invalid("n_seeds must be at least 8"));
    }
    let ks: Vec<f64> = (0..n_seeds)
        .map(|i| k_max * i as f64 / (n_seeds - 1) as f64)
        .collect();
    let rs: Vec<f64> = ks.iter().map(|&k| residual(k, np)).collect();

    let mut roots = Vec::new();
    for i in 0..n_seeds {
        if rs[i].abs() <= ROOT_TOL {
            roots.push(ks[i]);
        }
    }
    for i in 0..n_seeds - 1 {
        let (r0, r1) = (rs[i], rs[i + 1]);
        if r0.abs() <= ROOT_TOL || r1.abs() <= ROOT_TOL {
            continue;
        }
        if r0.signum() != r1.signum() {
            roots.push(bisect(np, ks[i], ks[i + 1], r0)?);
        }
    }
    // A same-signed triple whose parabolic fit dips through zero likely
    // hides a pair of close roots between seeds.
    for i in 1..n_seeds - 1 {
        let (a, b, c) = (rs[i - 1], rs[i], rs[i + 1]);
        if a.abs() <= ROOT_TOL || b.abs() <= ROOT_TOL || c.abs() <= ROOT_TOL {
            continue;
        }
        if a.signum() != b.signum() || b.signum() != c.signum() {
            continue;
        }
        if b.abs() >= a.abs() || b.abs() >= c.abs() {
            continue;
        }
        let curv = a - 2.0 * b + c;
        let slope = 0.5 * (c - a);
        if curv == 0.0 {
            continue;
        }
        let vertex = b - slope * slope / (2.0 * curv);
        if vertex.signum() != b.signum() && vertex.abs() > ROOT_TOL {
            return Err(Error::numerical(format!(
                "grid too coarse: possible near-tangent root pair near k = {}",
                ks[i]
            )));
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if out.last().map_or(true, |&l| (r - l).abs() > DEDUP_TOL) {
            out.push(r);
        }
    }
    Ok(out)
}

fn bisect(np: &NondimParams, mut lo: f64, mut hi: f64, mut r_lo: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r_mid = residual(mid, np);
        if r_mid.abs() <= ROOT_TOL || hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if r_mid.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::numerical("bisection did not converge"))
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionCurve {
    pub k_samples: Vec<f64>,
    pub residuals: Vec<f64>,
    pub roots: Vec<f64>,
}

pub fn sample_curve(np: &NondimParams, k_max: f64, n_samples: usize) -> Result<DispersionCurve> {
    let roots = find_roots(np, k_max, n_samples.max(8))?;
    let k_samples: Vec<f64> = (0..n_samples)
        .map(|i| k_max * i as f64 / (n_samples.max(2) - 1) as f64)
        .collect();
    let residuals = k_samples.iter().map(|&k| residual(k, np)).collect();
    Ok(DispersionCurve {
        k_samples,
        residuals,
        roots,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DoubleRootCertificate {
    pub residual_at_zero: f64,
    pub second_derivative: f64,
    pub second_derivative_fd: f64,
    pub beta_minus_beta0: f64,
    /// Fourth-order tangency at k = 0 (β = β₀).
    pub degenerate_tangency: bool,
}

pub fn double_root_certificate(np: &NondimParams) -> Result<DoubleRootCertificate> {
    if (np.alpha - np.alpha0).abs() > ALPHA_CRITICAL_TOL {
        return Err(Error::invalid(format!(
            "double-root certificate requires alpha = alpha0, got alpha - alpha0 = {}",
            np.alpha - np.alpha0
        )));
    }
    let r0 = residual(0.0, np);
    let second = 2.0 * (np.beta0 - np.beta);
    let h = 2e-4;
    let fd = (residual(h, np) - 2.0 * r0 + residual(-h, np)) / (h * h);
    Ok(DoubleRootCertificate {
        residual_at_zero: r0,
        second_derivative: second,
        second_derivative_fd: fd,
        beta_minus_beta0: np.beta - np.beta0,
        degenerate_tangency: second.abs() <= ALPHA_CRITICAL_TOL,
    })
}

pub fn curve_csv(curve: &DispersionCurve) -> String {
    let mut s = String::from("k,residual\n");
    for (k, r) in curve.k_samples.iter().zip(&curve.residuals) {
        s.push_str(&format!("{},{}\n", crate::fmt_f64(*k), crate::fmt_f64(*r)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_form_at_switch() {
        for a in [0.3f64, 1.0, 2.5] {
            let k = 1e-4;
            let direct = k / (a * k).tanh();
            assert!((k_coth(k * (1.0 - 1e-12), a) - direct).abs() < 1e-12);
        }
    }
}
