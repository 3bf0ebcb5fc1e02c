//! Physical and nondimensional parameters, critical values and the
//! stability coefficients along the wave-speed family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute margin by which β must exceed β₀ to count as supercritical.
pub const SUPERCRITICAL_TOL: f64 = 1e-12;

/// |𝔅| at or below this is treated as the degenerate (no leading-order wave) case.
pub const DEGENERATE_B_TOL: f64 = 1e-12;

/// Jump across the interface, upper minus lower.
#[inline]
pub fn jump(upper: f64, lower: f64) -> f64 {
    upper - lower
}

/// Dimensional inputs. Upper layer is `plus`, lower layer is `minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub sigma: f64,
    pub g: f64,
    pub c: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho_plus", self.rho_plus),
            ("rho_minus", self.rho_minus),
            ("d_plus", self.d_plus),
            ("d_minus", self.d_minus),
            ("omega_plus", self.omega_plus),
            ("omega_minus", self.omega_minus),
            ("sigma", self.sigma),
            ("g", self.g),
            ("c", self.c),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.rho_plus <= 0.0 {
            return Err(Error::invalid("rho_plus must be positive"));
        }
        if self.rho_plus > self.rho_minus {
            return Err(Error::invalid(
                "rho_plus > rho_minus: unstably stratified configuration",
            ));
        }
        if self.d_plus <= 0.0 || self.d_minus <= 0.0 {
            return Err(Error::invalid("layer depths must be positive"));
        }
        if self.sigma <= 0.0 {
            return Err(Error::invalid("sigma must be positive"));
        }
        if self.g <= 0.0 {
            return Err(Error::invalid("g must be positive"));
        }
        if self.c == 0.0 {
            return Err(Error::invalid("wave speed c must be nonzero"));
        }
        Ok(())
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }

    /// Parameters with prescribed nondimensional α and β at the current
    /// densities, depths, vorticities and c (solves for g and σ).
    pub fn from_alpha_beta(base: &Self, alpha: f64, beta: f64) -> Result<Self> {
        let drho = jump(base.rho_plus, base.rho_minus);
        if drho >= 0.0 {
            return Err(Error::invalid(
                "a density jump is needed to prescribe alpha (rho_plus < rho_minus)",
            ));
        }
        let c2 = base.c * base.c;
        let g = -alpha * base.rho_minus * c2 / (drho * base.d_plus);
        let sigma = beta * base.d_plus * base.rho_minus * c2;
        let p = Self { g, sigma, ..*base };
        p.validate()?;
        Ok(p)
    }

    /// Reference α₀ evaluation for the frozen reading uses the speed `c_ref`.
    fn shear_term(&self, c: f64) -> f64 {
        let varrho = self.rho_plus / self.rho_minus;
        (self.omega_plus * self.d_plus * varrho - self.omega_minus * self.d_plus) / c
    }
}

/// How α₀ is evaluated along the speed family.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Alpha0Mode {
    /// α₀ recomputed at every c.
    #[default]
    Pointwise,
    /// α₀ held at its value at the reference speed `c_ref`.
    Frozen { c_ref: f64 },
}

/// Sign of 𝔅, which fixes the polarity of the leading-order wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Elevation,
    Depression,
    Degenerate,
}

impl Polarity {
    pub fn from_frak_b(frak_b: f64) -> Self {
        if frak_b.abs() <= DEGENERATE_B_TOL {
            Polarity::Degenerate
        } else if frak_b > 0.0 {
            Polarity::Elevation
        } else {
            Polarity::Depression
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondimParams {
    pub alpha: f64,
    pub beta: f64,
    pub varrho: f64,
    pub d_ratio: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub beta_star: f64,
    /// √(α − α₀) when α > α₀.
    pub epsilon: Option<f64>,
    pub frak_a: f64,
    pub frak_b: f64,
    /// −β*^{3/2}𝔅 when β > β₀.
    pub coeff_k: Option<f64>,
    /// d₊ω₊/c and d₊ω₋/c; the vorticity enters only through these.
    pub shear_plus: f64,
    pub shear_minus: f64,
}

impl NondimParams {
    pub fn polarity(&self) -> Polarity {
        Polarity::from_frak_b(self.frak_b)
    }

    pub fn beta_supercritical(&self) -> bool {
        self.beta_star > SUPERCRITICAL_TOL
    }

    pub fn epsilon_or_err(&self) -> Result<f64> {
        self.epsilon
            .filter(|e| *e > 0.0)
            .ok_or_else(|| Error::invalid("alpha must exceed alpha0 (epsilon > 0)"))
    }

    /// Build directly from nondimensional data. The shear terms are
    /// d₊ω₊/c and d₊ω₋/c.
    pub fn from_parts(
        alpha: f64,
        beta: f64,
        varrho: f64,
        d_ratio: f64,
        shear_plus: f64,
        shear_minus: f64,
    ) -> Self {
        let alpha0 = varrho + 1.0 / d_ratio + shear_plus * varrho - shear_minus;
        Self::assemble(alpha, beta, varrho, d_ratio, shear_plus, shear_minus, alpha0)
    }

    fn assemble(
        alpha: f64,
        beta: f64,
        varrho: f64,
        d_ratio: f64,
        sp: f64,
        sm: f64,
        alpha0: f64,
    ) -> Self {
        let d = d_ratio;
        let beta0 = (varrho + d) / 3.0;
        let beta_star = beta - beta0;
        let epsilon = if alpha > alpha0 {
            Some((alpha - alpha0).sqrt())
        } else {
            None
        };
        let frak_a = varrho + 1.0 / d + sp * varrho / 2.0 - sm / 2.0;
        let frak_b = varrho - 1.0 / (d * d)
            + sp * varrho
            + sm / d
            + sp * sp * varrho / 3.0
            - sm * sm / 3.0;
        let coeff_k = if beta_star > 0.0 {
            Some(-beta_star.powf(1.5) * frak_b)
        } else {
            None
        };
        Self {
            alpha,
            beta,
            varrho,
            d_ratio,
            alpha0,
            beta0,
            beta_star,
            epsilon,
            frak_a,
            frak_b,
            coeff_k,
            shear_plus: sp,
            shear_minus: sm,
        }
    }

    /// Same parameters with α replaced.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self::assemble(
            alpha,
            self.beta,
            self.varrho,
            self.d_ratio,
            self.shear_plus,
            self.shear_minus,
            self.alpha0,
        )
    }

    /// Same parameters with β replaced.
    pub fn with_beta(&self, beta: f64) -> Self {
        Self::assemble(
            self.alpha,
            beta,
            self.varrho,
            self.d_ratio,
            self.shear_plus,
            self.shear_minus,
            self.alpha0,
        )
    }
}

pub fn nondim(p: &PhysicalParams) -> Result<NondimParams> {
    nondim_with(p, Alpha0Mode::Pointwise)
}

pub fn nondim_with(p: &PhysicalParams, mode: Alpha0Mode) -> Result<NondimParams> {
    p.validate()?;
    let c2 = p.c * p.c;
    let alpha = -p.g * jump(p.rho_plus, p.rho_minus) * p.d_plus / (p.rho_minus * c2);
    let beta = p.sigma / (p.d_plus * p.rho_minus * c2);
    let varrho = p.rho_plus / p.rho_minus;
    let d_ratio = p.d_minus / p.d_plus;
    let sp = p.omega_plus * p.d_plus / p.c;
    let sm = p.omega_minus * p.d_plus / p.c;
    let alpha0 = match mode {
        Alpha0Mode::Pointwise => varrho + 1.0 / d_ratio + p.shear_term(p.c),
        Alpha0Mode::Frozen { c_ref } => {
            if c_ref == 0.0 || !c_ref.is_finite() {
                return Err(Error::invalid("frozen reference speed must be finite and nonzero"));
            }
            varrho + 1.0 / d_ratio + p.shear_term(c_ref)
        }
    };
    Ok(NondimParams::assemble(alpha, beta, varrho, d_ratio, sp, sm, alpha0))
}

/// (β₀, α₀).
pub fn critical_pair(p: &PhysicalParams) -> Result<(f64, f64)> {
    let np = nondim(p)?;
    Ok((np.beta0, np.alpha0))
}

/// Derivatives in c at fixed physical data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyDerivatives {
    pub d_alpha_c: f64,
    pub d_beta_c: f64,
    pub d_alpha0: f64,
    pub d_epsilon: f64,
    pub d_frak_a: f64,
    pub d_frak_b: f64,
}

pub fn family_derivatives(p: &PhysicalParams) -> Result<FamilyDerivatives> {
    family_derivatives_with(p, Alpha0Mode::Pointwise)
}

pub fn family_derivatives_with(p: &PhysicalParams, mode: Alpha0Mode) -> Result<FamilyDerivatives> {
    let np = nondim_with(p, mode)?;
    let eps = np.epsilon_or_err()?;
    let c = p.c;
    let c2 = c * c;
    let c3 = c2 * c;
    let dp = p.d_plus;
    let (wp, wm) = (p.omega_plus, p.omega_minus);
    let (vr, d) = (np.varrho, np.d_ratio);

    let d_alpha_c = -2.0 * np.alpha / c;
    let d_beta_c = -2.0 * np.beta / c;
    let d_alpha0 = match mode {
        Alpha0Mode::Pointwise => (wm * dp - wp * dp * vr) / c2,
        Alpha0Mode::Frozen { .. } => 0.0,
    };
    let d_epsilon = (d_alpha_c - d_alpha0) / (2.0 * eps);
    let d_frak_a = (wm * dp - wp * vr * dp) / (2.0 * c2);
    let d_frak_b = -wp * dp * vr / c2 - wm * dp / (c2 * d) - 2.0 * wp * wp * dp * dp * vr / (3.0 * c3)
        + 2.0 * wm * wm * dp * dp / (3.0 * c3);
    Ok(FamilyDerivatives {
        d_alpha_c,
        d_beta_c,
        d_alpha0,
        d_epsilon,
        d_frak_a,
        d_frak_b,
    })
}
