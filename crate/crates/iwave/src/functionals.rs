//! Energy and momentum on discrete interface states, steady traces of a
//! traveling wave, and the comparison of −P along the wave family with m(c).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dno_operators::{DnoContext, Fourier, InterfaceField, Layer, PeriodicGrid};
use crate::error::{Error, Result};
use crate::params::{nondim, PhysicalParams};
use crate::profile::leading_order;
use crate::stability::m_of_c;

/// Largest admissible kinematic residual of steady traces, relative to
/// ‖cη′‖∞.
pub const KINEMATIC_TOL: f64 = 1e-9;

/// (η, ξ₊, ξ₋) on one periodic grid. ξ± are stored mean-free.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteState {
    pub eta: InterfaceField,
    pub xi_plus: InterfaceField,
    pub xi_minus: InterfaceField,
}

impl DiscreteState {
    pub fn new(eta: InterfaceField, xi_plus: InterfaceField, xi_minus: InterfaceField) -> Result<Self> {
        if eta.grid != xi_plus.grid || eta.grid != xi_minus.grid {
            return Err(Error::invalid("state fields live on different grids"));
        }
        let fourier = Fourier::new(eta.grid);
        let xi_plus = InterfaceField::new(eta.grid, fourier.project(&xi_plus.values))?;
        let xi_minus = InterfaceField::new(eta.grid, fourier.project(&xi_minus.values))?;
        Ok(Self { eta, xi_plus, xi_minus })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            eta: InterfaceField::zeros(grid),
            xi_plus: InterfaceField::zeros(grid),
            xi_minus: InterfaceField::zeros(grid),
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.eta.grid
    }

    /// ξ̃ = −(ρ₊ξ₊ − ρ₋ξ₋).
    pub fn xi_tilde(&self, p: &PhysicalParams) -> Vec<f64> {
        self.xi_plus
            .values
            .iter()
            .zip(&self.xi_minus.values)
            .map(|(xp, xm)| -(p.rho_plus * xp - p.rho_minus * xm))
            .collect()
    }

    /// The state moved right by `shift` (spectral interpolation).
    pub fn translated(&self, shift: f64) -> Self {
        let fourier = Fourier::new(self.grid());
        let mv = |f: &InterfaceField| InterfaceField {
            grid: f.grid,
            values: translate(&fourier, &f.values, shift),
        };
        Self {
            eta: mv(&self.eta),
            xi_plus: mv(&self.xi_plus),
            xi_minus: mv(&self.xi_minus),
        }
    }
}

/// f(· − shift) by phase rotation; the Nyquist mode keeps its real part.
pub fn translate(fourier: &Fourier, f: &[f64], shift: f64) -> Vec<f64> {
    let grid = fourier.grid;
    let nyq = grid.n_points / 2;
    let mut spec = fourier.transform(f);
    for (i, c) in spec.iter_mut().enumerate() {
        let phase = -grid.wavenumber(i) * shift;
        *c = if i == nyq {
            Complex64::new(c.re * phase.cos(), 0.0)
        } else {
            *c * Complex64::from_polar(1.0, phase)
        };
    }
    fourier.inverse_real(spec)
}

fn eta_eta_x(fourier: &Fourier, eta: &[f64]) -> Vec<f64> {
    fourier.derivative(eta).iter().zip(eta).map(|(d, e)| d * e).collect()
}

/// Terms of the energy that do not involve the velocity potentials.
fn potential_energy(fourier: &Fourier, eta: &[f64], p: &PhysicalParams) -> f64 {
    let deta = fourier.derivative(eta);
    let jump_rho = p.rho_plus - p.rho_minus;
    let jump_rho_omega2 = p.rho_plus * p.omega_plus.powi(2) - p.rho_minus * p.omega_minus.powi(2);
    let density: Vec<f64> = eta
        .iter()
        .zip(&deta)
        .map(|(e, d)| {
            -p.g * jump_rho * e * e - e.powi(3) * jump_rho_omega2 / 3.0
                + 2.0 * p.sigma * ((1.0 + d * d).sqrt() - 1.0)
        })
        .collect();
    0.5 * fourier.integrate(&density)
}

/// Energy in terms of ξ±: ½∫ ρ₋ξ₋G₋ξ₋ + ρ₊ξ₊G₊ξ₊ − 2⟦ρξω⟧ηη′ + potential terms.
pub fn energy(ctx: &DnoContext, s: &DiscreteState) -> Result<f64> {
    let p = &ctx.params;
    let f = &ctx.fourier;
    check_grid(ctx, s)?;
    let eta = &s.eta.values;
    ctx.check_inputs(&[
        (eta, "eta"),
        (&s.xi_plus.values, "xi_plus"),
        (&s.xi_minus.values, "xi_minus"),
    ])?;
    let gp = ctx.g(eta, &s.xi_plus.values, Layer::Plus)?;
    let gm = ctx.g(eta, &s.xi_minus.values, Layer::Minus)?;
    let eex = eta_eta_x(f, eta);
    let kinetic = p.rho_minus * f.pairing(&s.xi_minus.values, &gm) + p.rho_plus * f.pairing(&s.xi_plus.values, &gp);
    let jump_rho_xi_omega: Vec<f64> = s
        .xi_plus
        .values
        .iter()
        .zip(&s.xi_minus.values)
        .map(|(xp, xm)| p.rho_plus * xp * p.omega_plus - p.rho_minus * xm * p.omega_minus)
        .collect();
    let shear = -2.0 * f.pairing(&jump_rho_xi_omega, &eex);
    Ok(0.5 * (kinetic + shear) + potential_energy(f, eta, p))
}

/// Energy in terms of (η, ξ̃), through A, G₋ and B⁻¹. Verification path.
pub fn energy_tilde_form(ctx: &DnoContext, eta: &[f64], xi_tilde: &[f64]) -> Result<f64> {
    let p = &ctx.params;
    let f = &ctx.fourier;
    ctx.check_inputs(&[(eta, "eta"), (xi_tilde, "xi_tilde")])?;
    let xi_tilde = f.project(xi_tilde);
    let jump_omega = p.omega_plus - p.omega_minus;
    let eex = eta_eta_x(f, eta);
    let forced: Vec<f64> = eex.iter().map(|v| jump_omega * v).collect();

    let a_xi = ctx.a(eta, &xi_tilde, Layer::Plus)?;
    let binv_xi = ctx.b_inverse(eta, &xi_tilde)?;
    let gm_binv_xi = ctx.g(eta, &binv_xi, Layer::Minus)?;
    let binv_forced = ctx.b_inverse(eta, &forced)?;

    let quadratic = f.pairing(&xi_tilde, &a_xi) + 2.0 * p.rho_plus * f.pairing(&forced, &gm_binv_xi)
        - p.rho_plus * p.rho_minus * f.pairing(&forced, &binv_forced)
        + 2.0 * p.omega_minus * f.pairing(&xi_tilde, &eex);
    Ok(0.5 * quadratic + potential_energy(f, eta, p))
}

/// ξ± recovered from (η, ξ̃) under the kinematic coupling
/// G₋ξ₋ + G₊ξ₊ = ⟦ω⟧ηη′.
pub fn state_from_tilde(ctx: &DnoContext, eta: &[f64], xi_tilde: &[f64]) -> Result<DiscreteState> {
    let p = &ctx.params;
    let f = &ctx.fourier;
    ctx.check_inputs(&[(eta, "eta"), (xi_tilde, "xi_tilde")])?;
    let jump_omega = p.omega_plus - p.omega_minus;
    let eex = eta_eta_x(f, eta);
    let gm = ctx.g(eta, xi_tilde, Layer::Minus)?;
    let gp = ctx.g(eta, xi_tilde, Layer::Plus)?;
    let rhs_plus: Vec<f64> = gm
        .iter()
        .zip(&eex)
        .map(|(g, e)| -g + p.rho_minus * jump_omega * e)
        .collect();
    let rhs_minus: Vec<f64> = gp
        .iter()
        .zip(&eex)
        .map(|(g, e)| g + p.rho_plus * jump_omega * e)
        .collect();
    let grid = ctx.grid();
    DiscreteState::new(
        InterfaceField::new(grid, eta.to_vec())?,
        InterfaceField::new(grid, ctx.b_inverse(eta, &rhs_plus)?)?,
        InterfaceField::new(grid, ctx.b_inverse(eta, &rhs_minus)?)?,
    )
}

/// P = −∫(η′ξ̃ − ½⟦ρω⟧η²).
pub fn momentum(s: &DiscreteState, p: &PhysicalParams) -> f64 {
    let f = Fourier::new(s.grid());
    let deta = f.derivative(&s.eta.values);
    let xi_tilde = s.xi_tilde(p);
    let jump_rho_omega = p.rho_plus * p.omega_plus - p.rho_minus * p.omega_minus;
    let density: Vec<f64> = deta
        .iter()
        .zip(&xi_tilde)
        .zip(&s.eta.values)
        .map(|((d, x), e)| d * x - 0.5 * jump_rho_omega * e * e)
        .collect();
    -f.integrate(&density)
}

fn check_grid(ctx: &DnoContext, s: &DiscreteState) -> Result<()> {
    if s.grid() != ctx.grid() {
        return Err(Error::invalid("state grid differs from the operator grid"));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyTraces {
    pub state: DiscreteState,
    /// max|G₋ξ₋ + G₊ξ₊ − ⟦ω⟧ηη′| / max|cη′|.
    pub kinematic_residual: f64,
}

/// ξ± = ±G±(η)⁻¹(cη′ + ω±ηη′) for a wave moving at speed c.
pub fn steady_traces(ctx: &DnoContext, eta: &[f64]) -> Result<SteadyTraces> {
    let p = &ctx.params;
    let f = &ctx.fourier;
    ctx.check_inputs(&[(eta, "eta")])?;
    let deta = f.derivative(eta);
    let eex = eta_eta_x(f, eta);
    let forcing = |omega: f64| -> Vec<f64> { deta.iter().zip(&eex).map(|(d, e)| p.c * d + omega * e).collect() };
    let xi_plus = ctx.g_inverse(eta, &forcing(p.omega_plus), Layer::Plus)?;
    let xi_minus: Vec<f64> = ctx
        .g_inverse(eta, &forcing(p.omega_minus), Layer::Minus)?
        .into_iter()
        .map(|v| -v)
        .collect();

    let gp = ctx.g(eta, &xi_plus, Layer::Plus)?;
    let gm = ctx.g(eta, &xi_minus, Layer::Minus)?;
    let jump_omega = p.omega_plus - p.omega_minus;
    let scale = deta.iter().fold(0.0f64, |m, d| m.max((p.c * d).abs()));
    let defect = gp
        .iter()
        .zip(&gm)
        .zip(&eex)
        .fold(0.0f64, |m, ((a, b), e)| m.max((a + b - jump_omega * e).abs()));
    let kinematic_residual = if scale > 0.0 { defect / scale } else { defect };
    if kinematic_residual > KINEMATIC_TOL {
        return Err(Error::numerical(format!(
            "steady traces: kinematic residual {kinematic_residual:e} exceeds {KINEMATIC_TOL:e}"
        )));
    }
    let grid = ctx.grid();
    Ok(SteadyTraces {
        state: DiscreteState::new(
            InterfaceField::new(grid, eta.to_vec())?,
            InterfaceField::new(grid, xi_plus)?,
            InterfaceField::new(grid, xi_minus)?,
        )?,
        kinematic_residual,
    })
}

/// Momentum of a localized traveling wave on the line, from its steady
/// traces on a periodic grid.
///
/// On the line ξ±′ = ±∂ₓG±⁻¹∂ₓ f± with f± = cη + ω±η²/2, and the symbol of
/// ∂ₓG±⁻¹∂ₓ tends to −1/d± as k → 0. The periodic inverse drops the mean of
/// f±, which biases −P by O(decay scale / period); restoring that mean mode
/// with the k → 0 limit removes the bias.
pub fn traveling_wave_momentum(traces: &SteadyTraces, p: &PhysicalParams) -> f64 {
    let s = &traces.state;
    let f = Fourier::new(s.grid());
    let eta = &s.eta.values;
    let forcing_mean = |omega: f64| -> f64 {
        let v: Vec<f64> = eta.iter().map(|e| p.c * e + 0.5 * omega * e * e).collect();
        f.mean(&v)
    };
    let slope_plus = -forcing_mean(p.omega_plus) / p.d_plus;
    let slope_minus = forcing_mean(p.omega_minus) / p.d_minus;
    let slope_tilde = -(p.rho_plus * slope_plus - p.rho_minus * slope_minus);
    // −P gains −∫η·Δξ̃′, so P gains +Δξ̃′·∫η.
    momentum(s, p) + slope_tilde * f.integrate(eta)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DprimeSettings {
    pub n_points: usize,
    /// Period in units of the profile decay scale 2d₊√β*/ε.
    pub decay_scales: f64,
}

impl Default for DprimeSettings {
    fn default() -> Self {
        Self {
            n_points: 512,
            decay_scales: 32.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DprimeRow {
    pub epsilon: f64,
    pub g: f64,
    /// −P of the wave on the line.
    pub minus_momentum: f64,
    /// −P of the periodic state, before the mean-mode correction.
    pub minus_momentum_periodic: f64,
    pub m: f64,
    /// −P/m.
    pub ratio: f64,
    /// |−P − m|/|m|.
    pub rel_error: f64,
    pub period: f64,
    pub n_points: usize,
    pub kinematic_residual: f64,
    pub spectral_tail: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DprimeReport {
    pub rows: Vec<DprimeRow>,
    /// Least-squares slope of log rel_error against log ε.
    pub fitted_order: Option<f64>,
    pub sign_agreement: bool,
    pub settings: DprimeSettings,
}

/// For each ε, g is retuned so that α = α₀ + ε² at the given c, β and ω±;
/// the leading-order profile, its steady traces and momentum are then
/// compared with m(c).
pub fn dprime_check(p: &PhysicalParams, eps_list: &[f64], settings: &DprimeSettings) -> Result<DprimeReport> {
    if eps_list.is_empty() {
        return Err(Error::invalid("dprime check needs at least one epsilon"));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("epsilon values must be positive"));
    }
    if !(settings.decay_scales >= 20.0) {
        return Err(Error::invalid("period must span at least 20 decay scales"));
    }
    let np = nondim(p)?;
    let rows: Vec<DprimeRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let pe = PhysicalParams::from_alpha_beta(p, np.alpha0 + eps * eps, np.beta)?;
            dprime_row(&pe, eps, settings)
        })
        .collect::<Result<_>>()?;
    let fitted_order = fit_order(&rows);
    let sign_agreement = rows.iter().all(|r| r.minus_momentum.signum() == r.m.signum());
    Ok(DprimeReport {
        rows,
        fitted_order,
        sign_agreement,
        settings: *settings,
    })
}

fn dprime_row(p: &PhysicalParams, eps: f64, settings: &DprimeSettings) -> Result<DprimeRow> {
    let np = nondim(p)?;
    let decay = 2.0 * p.d_plus * np.beta_star.max(0.0).sqrt() / eps;
    let grid = PeriodicGrid::new(settings.n_points, settings.decay_scales * decay)?;
    let wave = leading_order(p, Some(grid.x()))?.wave()?;
    let ctx = DnoContext::new(p, grid)?;
    let spectral_tail = ctx.fourier.spectral_tail(&wave.eta);
    let traces = steady_traces(&ctx, &wave.eta)?;
    let minus_momentum = -traveling_wave_momentum(&traces, p);
    let minus_momentum_periodic = -momentum(&traces.state, p);
    let m = m_of_c(p)?;
    Ok(DprimeRow {
        epsilon: eps,
        g: p.g,
        minus_momentum,
        minus_momentum_periodic,
        m,
        ratio: minus_momentum / m,
        rel_error: (minus_momentum - m).abs() / m.abs(),
        period: grid.period,
        n_points: grid.n_points,
        kinematic_residual: traces.kinematic_residual,
        spectral_tail,
    })
}

fn fit_order(rows: &[DprimeRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.rel_error > 0.0)
        .map(|r| (r.epsilon.ln(), r.rel_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}
