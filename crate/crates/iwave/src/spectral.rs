//! Spectrum of the linearized augmented potential at small amplitude.
//!
//! The flat-state multiplier 𝔮_c gives the bottom τ* of the essential
//! spectrum. Near criticality the operator at the wave, rescaled by ε², tends
//! to Q̃₀ = −β*∂ₓ² + 1 − 3𝔅η̃, whose spectrum is computed by Fourier collocation.
//!
//! Reconciling the two long-wave scalings. Let x be the variable in which the
//! wave is η̃ and the rescaled symbol tends to 1 + β*κ². Substituting
//! x = √β*·y turns −β*∂ₓ² into −∂ᵧ², and the profile ODE β*η̃″ = η̃ − (3/2)𝔅η̃²
//! into u″ = u − (3/2)u² for u = 𝔅η̃, solved by u = sech²(y/2). Hence
//! Q̃₀ is unitarily equivalent to 𝐋 = −∂ᵧ² + 1 − 3sech²(y/2) for every admissible
//! parameter set. Any other choice of length unit (ε/d₊ alone, or with the extra
//! √β*) only changes the substitution, never 𝐋, so 𝐋 is the only operator solved.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::dno_operators::{Fourier, PeriodicGrid};
use crate::error::{Error, Result};
use crate::params::{jump, nondim, PhysicalParams};

/// Essential edge of 𝐋.
pub const LIMITING_EDGE: f64 = 1.0;
/// Eigenvalues closer than this to the edge belong to the discretized continuum
/// (𝐋 has a threshold resonance at exactly 1).
pub const EDGE_MARGIN: f64 = 1e-6;
pub const MIN_DOMAIN: f64 = 80.0;
pub const MIN_MODES: usize = 1024;
/// Potential mass allowed at the periodic boundary.
pub const TAIL_TOL: f64 = 1e-14;
/// Allowed relative spectral tail of the reported eigenvectors.
pub const EIGENVECTOR_TAIL_TOL: f64 = 1e-10;
/// Agreement between the refined minimum and a zoomed grid minimum.
pub const MINIMUM_CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub operator_name: String,
    pub eigenvalues: Vec<f64>,
    pub essential_edge: f64,
    pub morse_index: usize,
    /// Domain length and number of collocation points, when discretized.
    pub domain_length: Option<f64>,
    pub modes: Option<usize>,
    /// |⟨v₀, u′⟩|/(‖v₀‖‖u′‖) for the eigenvector closest to 0.
    pub zero_mode_correlation: Option<f64>,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

/// 𝔮_c(ξ) at the flat state, ξ a dimensional wavenumber.
pub fn qc0_symbol(xi: f64, p: &PhysicalParams) -> f64 {
    let xi = xi.abs();
    let d_plus = p.d_plus;
    let k_coth = |depth: f64| {
        let arg = depth * xi;
        if arg < 1e-4 {
            // ξ coth(dξ) = 1/d + dξ²/3 − …
            1.0 / depth + depth * xi * xi / 3.0
        } else {
            xi / arg.tanh()
        }
    };
    let alpha = -p.g * jump(p.rho_plus, p.rho_minus) * d_plus / (p.rho_minus * p.c * p.c);
    let beta = p.sigma / (d_plus * p.rho_minus * p.c * p.c);
    let layers = (p.rho_plus / p.rho_minus) * d_plus * k_coth(p.d_plus) + d_plus * k_coth(p.d_minus);
    let shear = p.omega_plus * d_plus * (p.rho_plus / p.rho_minus) / p.c - p.omega_minus * d_plus / p.c;
    let bracket = layers - beta * d_plus * d_plus * xi * xi + shear;
    -p.g * jump(p.rho_plus, p.rho_minus) * (1.0 - bracket / alpha)
}

/// ε²-rescaled symbol α𝔮_c(εκ/d₊)/(−g⟦ρ⟧ε²), which tends to 1 + β*κ².
///
/// The long-wave expansion is read with exponent 0 on ε in front of the
/// (β − β₀)κ² term, the only reading compatible with that limit.
pub fn rescaled_symbol(kappa: f64, p: &PhysicalParams) -> Result<f64> {
    let np = nondim(p)?;
    let eps = np.epsilon_or_err()?;
    let scale = -p.g * jump(p.rho_plus, p.rho_minus) * eps * eps / np.alpha;
    Ok(qc0_symbol(eps * kappa / p.d_plus, p) / scale)
}

/// Bottom of the essential spectrum of the flat-state operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauStar {
    pub value: f64,
    /// Minimizing wavenumber; 0 on the strong-tension branch.
    pub argmin: f64,
    pub strong_tension: bool,
    /// Zoomed-grid minimum used as the cross-check on the weak-tension branch.
    pub grid_minimum: f64,
}

pub fn tau_star(p: &PhysicalParams) -> Result<TauStar> {
    let np = nondim(p)?;
    if !(np.alpha > 0.0) {
        return Err(Error::invalid(format!("τ* needs α > 0, got {}", np.alpha)));
    }
    if np.beta >= np.beta0 {
        let value = -p.g * jump(p.rho_plus, p.rho_minus) * (1.0 - np.alpha0 / np.alpha);
        return Ok(TauStar { value, argmin: 0.0, strong_tension: true, grid_minimum: qc0_symbol(0.0, p) });
    }
    weak_tension_minimum(p, np.beta, np.varrho)
}

fn weak_tension_minimum(p: &PhysicalParams, beta: f64, varrho: f64) -> Result<TauStar> {
    let symbol = |xi: f64| qc0_symbol(xi, p);
    // Past this wavenumber −βk² dominates the linear growth of the coth terms.
    let k_max = 4.0 * (varrho + 1.0 + 1.0 / beta) / beta + 10.0;
    let xi_max = k_max / p.d_plus;
    let n = 20_000;
    let h = xi_max / n as f64;
    let (i_min, _) = (0..=n)
        .map(|i| (i, symbol(i as f64 * h)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if i_min == n {
        return Err(Error::numerical(format!("τ* search hit the end of the wavenumber window {xi_max}")));
    }
    let (mut lo, mut hi) = ((i_min.max(1) - 1) as f64 * h, (i_min + 1) as f64 * h);
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (symbol(a), symbol(b));
    let mut iterations = 0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::numerical(format!("golden-section search did not converge: bracket width {:e}", hi - lo)));
        }
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = symbol(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = symbol(b);
        }
    }
    let argmin = 0.5 * (lo + hi);
    let value = symbol(argmin);
    // Zoomed grid around the bracket: spacing h/1000 keeps its own error far below the tolerance.
    let zoom = 2000;
    let start = (i_min.max(1) - 1) as f64 * h;
    let grid_minimum = (0..=zoom).map(|j| symbol(start + 2.0 * h * j as f64 / zoom as f64)).fold(f64::INFINITY, f64::min);
    let gap = (grid_minimum - value).abs();
    if gap > MINIMUM_CROSS_CHECK_TOL * value.abs().max(1.0) || value > grid_minimum + 1e-14 * value.abs().max(1.0) {
        return Err(Error::numerical(format!(
            "τ* cross-check failed: refined {value} vs grid {grid_minimum} (gap {gap:e})"
        )));
    }
    Ok(TauStar { value, argmin, strong_tension: false, grid_minimum })
}

/// Flat-state operator: a pure multiplier, so no point spectrum and edge τ*.
pub fn qc0_spectrum(p: &PhysicalParams) -> Result<SpectrumResult> {
    let tau = tau_star(p)?;
    Ok(SpectrumResult {
        operator_name: "qc0".into(),
        eigenvalues: Vec::new(),
        essential_edge: tau.value,
        morse_index: usize::from(tau.value < 0.0),
        domain_length: None,
        modes: None,
        zero_mode_correlation: None,
        grid: Vec::new(),
        eigenvectors: Vec::new(),
    })
}

fn potential(y: f64) -> f64 {
    let s = 1.0 / (0.5 * y).cosh();
    s * s
}

/// Symmetric Fourier second-derivative matrix on M points of [−L/2, L/2).
fn second_derivative_matrix(domain_length: f64, modes: usize) -> DMatrix<f64> {
    let h = 2.0 * std::f64::consts::PI / modes as f64;
    let scale = (2.0 * std::f64::consts::PI / domain_length).powi(2);
    DMatrix::from_fn(modes, modes, |i, j| {
        if i == j {
            scale * (-std::f64::consts::PI.powi(2) / (3.0 * h * h) - 1.0 / 6.0)
        } else {
            let offset = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            -scale * sign * 0.5 / (0.5 * h * offset).sin().powi(2)
        }
    })
}

/// Eigenvalues of 𝐋 = −∂ᵧ² + 1 − 3sech²(y/2) below its essential edge.
pub fn limiting_spectrum(domain_length: f64, modes: usize) -> Result<SpectrumResult> {
    if !(domain_length >= MIN_DOMAIN) || !domain_length.is_finite() {
        return Err(Error::invalid(format!("domain length must be ≥ {MIN_DOMAIN}, got {domain_length}")));
    }
    if modes < MIN_MODES || !modes.is_power_of_two() {
        return Err(Error::invalid(format!("modes must be a power of two ≥ {MIN_MODES}, got {modes}")));
    }
    let boundary = 3.0 * potential(0.5 * domain_length);
    if boundary > TAIL_TOL {
        return Err(Error::invalid(format!("potential is not localized: {boundary:e} at the boundary")));
    }
    let grid = PeriodicGrid::new(modes, domain_length)?;
    let ys = grid.x();
    let mut matrix = -second_derivative_matrix(domain_length, modes);
    for (i, y) in ys.iter().enumerate() {
        matrix[(i, i)] += 1.0 - 3.0 * potential(*y);
    }
    let eig = SymmetricEigen::new(matrix);
    let mut below: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < LIMITING_EDGE - EDGE_MARGIN)
        .map(|(i, v)| (*v, i))
        .collect();
    below.sort_by(|a, b| a.0.total_cmp(&b.0));

    let fourier = Fourier::new(grid);
    let eigenvectors: Vec<Vec<f64>> = below.iter().map(|(_, i)| eig.eigenvectors.column(*i).iter().copied().collect()).collect();
    for (vec, (value, _)) in eigenvectors.iter().zip(&below) {
        let tail = fourier.spectral_tail(vec);
        if tail > EIGENVECTOR_TAIL_TOL {
            return Err(Error::numerical(format!(
                "eigenvector for {value} is under-resolved: spectral tail {tail:e}"
            )));
        }
    }
    // u′ for u = sech²(y/2) is −sech²(y/2)·tanh(y/2).
    let zero_mode: Vec<f64> = ys.iter().map(|y| -potential(*y) * (0.5 * y).tanh()).collect();
    let zero_mode_correlation = below
        .iter()
        .zip(&eigenvectors)
        .min_by(|a, b| a.0 .0.abs().total_cmp(&b.0 .0.abs()))
        .map(|(_, v)| correlation(v, &zero_mode));
    let eigenvalues: Vec<f64> = below.iter().map(|(v, _)| *v).collect();
    Ok(SpectrumResult {
        operator_name: "limiting".into(),
        morse_index: eigenvalues.iter().filter(|v| **v < -EDGE_MARGIN).count(),
        eigenvalues,
        essential_edge: LIMITING_EDGE,
        domain_length: Some(domain_length),
        modes: Some(modes),
        zero_mode_correlation,
        grid: ys,
        eigenvectors,
    })
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot.abs() / (na * nb)
}

/// Leading-order magnitude of the negative eigenvalue at the wave: (ε²c²ρ₋/d₊)·5/4.
pub fn scaled_spectrum_estimate(p: &PhysicalParams) -> Result<f64> {
    let eps = nondim(p)?.epsilon_or_err()?;
    Ok(eps * eps * p.c * p.c * p.rho_minus / p.d_plus * 1.25)
}

/// Columns y, then one column per reported eigenvalue.
pub fn eigenfunction_csv(result: &SpectrumResult) -> String {
    let mut s = String::from("y");
    for k in 0..result.eigenvectors.len() {
        s.push_str(&format!(",mode{k}"));
    }
    s.push('\n');
    for (i, y) in result.grid.iter().enumerate() {
        s.push_str(&crate::fmt_f64(*y));
        for v in &result.eigenvectors {
            s.push(',');
            s.push_str(&crate::fmt_f64(v[i]));
        }
        s.push('\n');
    }
    s
}
