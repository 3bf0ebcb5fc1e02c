//! Moment-of-instability slope m(c), its c-derivative and the verdict.
//!
//! m(c) = −4𝔄cε³ρ₋d₊²√β*/𝔅², β* = β − β₀. The analytic m′ carries the same
//! ρ₋d₊² factor as m so that it is the true derivative; the bracket is the
//! sign-deciding factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{
    family_derivatives_with, nondim_with, Alpha0Mode, NondimParams, PhysicalParams, Polarity,
    DEGENERATE_B_TOL,
};

/// Relative disagreement between analytic and finite-difference m′ that
/// counts as a consistency fault.
pub const CONSISTENCY_TOL: f64 = 1e-4;
/// Relative scale of the Inconclusive band around m′ = 0.
pub const VERDICT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

fn checked(p: &PhysicalParams, mode: Alpha0Mode) -> Result<(NondimParams, f64)> {
    let np = nondim_with(p, mode)?;
    if !np.beta_supercritical() {
        return Err(Error::invalid(format!(
            "m(c) requires beta > beta0 (beta - beta0 = {})",
            np.beta_star
        )));
    }
    let eps = np.epsilon_or_err()?;
    if np.frak_b.abs() <= DEGENERATE_B_TOL {
        return Err(Error::invalid(format!(
            "degenerate coefficient B = {}",
            np.frak_b
        )));
    }
    Ok((np, eps))
}

pub fn m_of_c(p: &PhysicalParams) -> Result<f64> {
    m_of_c_with(p, Alpha0Mode::Pointwise)
}

pub fn m_of_c_with(p: &PhysicalParams, mode: Alpha0Mode) -> Result<f64> {
    let (np, eps) = checked(p, mode)?;
    Ok(slope_from_parts(np.frak_a, np.frak_b, p.c, eps, p.rho_minus, p.d_plus, np.beta_star))
}

/// The closed form of m from its ingredients, without validation.
pub fn slope_from_parts(
    frak_a: f64,
    frak_b: f64,
    c: f64,
    epsilon: f64,
    rho_minus: f64,
    d_plus: f64,
    beta_star: f64,
) -> f64 {
    -4.0 * frak_a * c * epsilon.powi(3) * rho_minus * d_plus * d_plus * beta_star.sqrt() / (frak_b * frak_b)
}

/// The five summands of the bracket, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketTerms {
    pub d_frak_a_term: f64,
    pub frak_a_term: f64,
    pub d_epsilon_term: f64,
    pub d_beta_term: f64,
    pub d_frak_b_term: f64,
}

impl BracketTerms {
    pub fn sum(&self) -> f64 {
        self.d_frak_a_term + self.frak_a_term + self.d_epsilon_term + self.d_beta_term + self.d_frak_b_term
    }

    pub fn l1(&self) -> f64 {
        self.d_frak_a_term.abs()
            + self.frak_a_term.abs()
            + self.d_epsilon_term.abs()
            + self.d_beta_term.abs()
            + self.d_frak_b_term.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeDerivative {
    pub value: f64,
    pub bracket: f64,
    pub prefactor: f64,
    pub terms: BracketTerms,
}

pub fn m_prime(p: &PhysicalParams) -> Result<SlopeDerivative> {
    m_prime_with(p, Alpha0Mode::Pointwise)
}

pub fn m_prime_with(p: &PhysicalParams, mode: Alpha0Mode) -> Result<SlopeDerivative> {
    let (np, eps) = checked(p, mode)?;
    let fd = family_derivatives_with(p, mode)?;
    let (a, b, c, bs) = (np.frak_a, np.frak_b, p.c, np.beta_star);
    let e3 = eps.powi(3);
    let b2 = b * b;
    let terms = BracketTerms {
        d_frak_a_term: b2 * fd.d_frak_a * e3 * c * bs,
        frak_a_term: b2 * a * e3 * bs,
        d_epsilon_term: b2 * 3.0 * a * c * eps * eps * fd.d_epsilon * bs,
        d_beta_term: b2 * a * c * e3 * fd.d_beta_c / 2.0,
        d_frak_b_term: -2.0 * a * b * fd.d_frak_b * c * e3 * bs,
    };
    let bracket = terms.sum();
    let prefactor = -4.0 * p.rho_minus * p.d_plus * p.d_plus / (b2 * b2 * bs.sqrt());
    Ok(SlopeDerivative {
        value: prefactor * bracket,
        bracket,
        prefactor,
        terms,
    })
}

/// Fourth-order central difference of m in c. The step starts at 1e-6|c| and
/// shrinks until it moves α − α₀ and β − β₀ by at most 1% of themselves.
pub fn m_prime_fd_with(p: &PhysicalParams, mode: Alpha0Mode) -> Result<f64> {
    let (np, _) = checked(p, mode)?;
    let fd = family_derivatives_with(p, mode)?;
    let alpha_gap = np.alpha - np.alpha0;
    let alpha_rate = (fd.d_alpha_c - fd.d_alpha0).abs().max(f64::MIN_POSITIVE);
    let beta_rate = fd.d_beta_c.abs().max(f64::MIN_POSITIVE);
    let h = (1e-6 * p.c.abs())
        .min(1e-2 * alpha_gap / alpha_rate)
        .min(1e-2 * np.beta_star / beta_rate);
    let m = |dc: f64| m_of_c_with(&p.with_c(p.c + dc), mode);
    Ok((8.0 * (m(h)? - m(-h)?) - (m(2.0 * h)? - m(-2.0 * h)?)) / (12.0 * h))
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub m: f64,
    pub m_prime: f64,
    pub m_prime_fd: f64,
    pub bracket: f64,
    pub terms: BracketTerms,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub polarity: Polarity,
    pub frak_a: f64,
    pub frak_b: f64,
    pub epsilon: f64,
    pub beta_star: f64,
    pub alpha0_mode: Alpha0Mode,
    pub inputs: PhysicalParams,
}

pub fn verdict_for(d: &SlopeDerivative) -> (Verdict, f64) {
    let tol = VERDICT_TOL * d.prefactor.abs() * d.terms.l1();
    let v = if d.value > tol {
        Verdict::Stable
    } else if d.value < -tol {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    };
    (v, tol)
}

pub fn classify(p: &PhysicalParams) -> Result<StabilityReport> {
    classify_with(p, Alpha0Mode::Pointwise)
}

pub fn classify_with(p: &PhysicalParams, mode: Alpha0Mode) -> Result<StabilityReport> {
    let (np, eps) = checked(p, mode)?;
    let m = m_of_c_with(p, mode)?;
    let d = m_prime_with(p, mode)?;
    let fd = m_prime_fd_with(p, mode)?;
    let scale = d.value.abs().max(d.prefactor.abs() * d.terms.l1() * 1e-8);
    if (d.value - fd).abs() > CONSISTENCY_TOL * scale {
        return Err(Error::numerical(format!(
            "stability: analytic m' = {} disagrees with finite difference {} (relative {:e})",
            d.value,
            fd,
            (d.value - fd).abs() / scale
        )));
    }
    let (verdict, tolerance) = verdict_for(&d);
    Ok(StabilityReport {
        m,
        m_prime: d.value,
        m_prime_fd: fd,
        bracket: d.bracket,
        terms: d.terms,
        tolerance,
        verdict,
        polarity: np.polarity(),
        frak_a: np.frak_a,
        frak_b: np.frak_b,
        epsilon: eps,
        beta_star: np.beta_star,
        alpha0_mode: mode,
        inputs: *p,
    })
}

/// Single-layer-vorticity regimes of the two verdict tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// ω₊ = 0, 2(ϱ−1) < cω₋/g ≤ 0, elevation: Stable.
    StableElevation,
    /// ω₋ = 0, 2(1−ϱ)/ϱ > cω₊/g ≥ 0, depression: Stable.
    StableDepression,
    /// ω₋ = 0, cω₊ > 0, 2(ϱ−1)/ϱ < cω₊/g, elevation: Unstable.
    UnstableElevation,
    /// ω₊ = 0, cω₋ < 0, 2(ϱ−1) > cω₋/g, depression: Unstable.
    UnstableDepression,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::StableElevation,
        Regime::StableDepression,
        Regime::UnstableElevation,
        Regime::UnstableDepression,
    ];

    pub fn predicted(self) -> Verdict {
        match self {
            Regime::StableElevation | Regime::StableDepression => Verdict::Stable,
            _ => Verdict::Unstable,
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            Regime::StableElevation | Regime::UnstableElevation => Polarity::Elevation,
            _ => Polarity::Depression,
        }
    }

    /// True when the vorticity sits in the lower layer.
    fn lower_layer(self) -> bool {
        matches!(self, Regime::StableElevation | Regime::UnstableDepression)
    }

    /// Open/closed interval of r = cω/g allowed by the table entry, as
    /// (low, high, low_closed, high_closed). `cap` bounds the open-ended rows.
    fn interval(self, varrho: f64, cap: f64) -> (f64, f64, bool, bool) {
        match self {
            Regime::StableElevation => (2.0 * (varrho - 1.0), 0.0, false, true),
            Regime::StableDepression => (0.0, 2.0 * (1.0 - varrho) / varrho, true, false),
            Regime::UnstableElevation => ((2.0 * (varrho - 1.0) / varrho).max(0.0), cap, false, true),
            Regime::UnstableDepression => (-cap, (2.0 * (varrho - 1.0)).min(0.0), true, false),
        }
    }

    pub fn contains(self, varrho: f64, r: f64) -> bool {
        let (lo, hi, lc, hc) = self.interval(varrho, f64::INFINITY);
        let above = if lc { r >= lo } else { r > lo };
        let below = if hc { r <= hi } else { r < hi };
        above && below
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub n_varrho: usize,
    pub n_depth: usize,
    pub n_vorticity: usize,
    pub beta_excess: Vec<f64>,
    pub epsilon: f64,
    /// Bound on |cω/g| for the open-ended rows.
    pub vorticity_cap: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            n_varrho: 9,
            n_depth: 6,
            n_vorticity: 12,
            beta_excess: vec![0.1, 0.5, 1.5],
            epsilon: 0.05,
            vorticity_cap: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    /// Classified under both α₀ readings.
    Classified,
    /// α = α₀ + ε² has no solution with g > 0.
    NoWave,
    /// Wave exists but its polarity is not the table column's.
    WrongPolarity,
    /// |𝔅| ≤ tolerance.
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub regime: Regime,
    pub varrho: f64,
    pub depth_ratio: f64,
    pub vorticity_ratio: f64,
    pub c_sign: f64,
    pub beta_excess: f64,
    pub status: SweepStatus,
    pub m: Option<f64>,
    pub m_prime_pointwise: Option<f64>,
    pub m_prime_frozen: Option<f64>,
    pub verdict_pointwise: Option<Verdict>,
    pub verdict_frozen: Option<Verdict>,
    pub predicted: Verdict,
    pub matches: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub regime: Regime,
    pub grid_points: usize,
    pub classified: usize,
    pub matches_pointwise: usize,
    pub matches_frozen: usize,
    pub mode_disagreements: usize,
    pub no_wave: usize,
    pub wrong_polarity: usize,
    pub degenerate: usize,
}

impl SweepSummary {
    pub fn all_match(&self) -> bool {
        self.classified > 0 && self.matches_pointwise == self.classified && self.matches_frozen == self.classified
    }
}

/// Physical parameters with ρ₋ = 1, d₊ = 1, |c| = 1, the given vorticity
/// ratio r = cω/g in the regime's rotational layer, and g, σ chosen so that
/// α = α₀ + ε², β = β₀ + β*. None when no positive g exists.
pub fn regime_params(
    regime: Regime,
    varrho: f64,
    depth_ratio: f64,
    r: f64,
    c_sign: f64,
    epsilon: f64,
    beta_excess: f64,
) -> Option<PhysicalParams> {
    let c = c_sign.signum();
    // α − α₀ with α = g(1−ϱ)/c² and α₀ = ϱ + 1/d + (ω₊ϱ − ω₋)/c is linear in g.
    let slope = if regime.lower_layer() {
        1.0 - varrho + r
    } else {
        1.0 - varrho - r * varrho
    };
    if slope <= 0.0 {
        return None;
    }
    let g = (varrho + 1.0 / depth_ratio + epsilon * epsilon) / slope;
    let omega = r * g / c;
    let (omega_plus, omega_minus) = if regime.lower_layer() {
        (0.0, omega)
    } else {
        (omega, 0.0)
    };
    let beta0 = (varrho + depth_ratio) / 3.0;
    Some(PhysicalParams {
        rho_plus: varrho,
        rho_minus: 1.0,
        d_plus: 1.0,
        d_minus: depth_ratio,
        omega_plus,
        omega_minus,
        sigma: beta0 + beta_excess,
        g,
        c,
    })
}

fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

fn endpoints(lo: f64, hi: f64, lc: bool, hc: bool, n: usize) -> Vec<f64> {
    let mut v = interior(lo, hi, n);
    if lc {
        v.insert(0, lo);
    }
    if hc {
        v.push(hi);
    }
    v
}

pub fn regime_sweep(regime: Regime, grid: &SweepGrid) -> Result<(SweepSummary, Vec<SweepRow>)> {
    if grid.n_varrho == 0 || grid.n_depth == 0 || grid.n_vorticity == 0 || grid.beta_excess.is_empty() {
        return Err(Error::invalid("sweep grid dimensions must be positive"));
    }
    if !(grid.epsilon > 0.0) || grid.beta_excess.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::invalid("sweep needs epsilon > 0 and beta_excess > 0"));
    }
    let varrhos = interior(0.0, 1.0, grid.n_varrho);
    let depths: Vec<f64> = interior(0.0, 1.0, grid.n_depth)
        .into_iter()
        .map(|t| 4f64.powf(2.0 * t - 1.0))
        .collect();
    let mut rows = Vec::new();
    for &varrho in &varrhos {
        let (lo, hi, lc, hc) = regime.interval(varrho, grid.vorticity_cap);
        if hi <= lo {
            continue;
        }
        let rs: Vec<f64> = endpoints(lo, hi, lc, hc, grid.n_vorticity)
            .into_iter()
            .filter(|r| regime.contains(varrho, *r))
            .collect();
        for &d in &depths {
            for &r in &rs {
                for c_sign in [-1.0, 1.0] {
                    for &bx in &grid.beta_excess {
                        rows.push(sweep_point(regime, varrho, d, r, c_sign, grid.epsilon, bx)?);
                    }
                }
            }
        }
    }
    let count = |f: &dyn Fn(&SweepRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let predicted = regime.predicted();
    let summary = SweepSummary {
        regime,
        grid_points: rows.len(),
        classified: count(&|r| r.status == SweepStatus::Classified),
        matches_pointwise: count(&|r| r.verdict_pointwise == Some(predicted)),
        matches_frozen: count(&|r| r.verdict_frozen == Some(predicted)),
        mode_disagreements: count(&|r| {
            r.status == SweepStatus::Classified && r.verdict_pointwise != r.verdict_frozen
        }),
        no_wave: count(&|r| r.status == SweepStatus::NoWave),
        wrong_polarity: count(&|r| r.status == SweepStatus::WrongPolarity),
        degenerate: count(&|r| r.status == SweepStatus::Degenerate),
    };
    Ok((summary, rows))
}

fn sweep_point(
    regime: Regime,
    varrho: f64,
    depth_ratio: f64,
    r: f64,
    c_sign: f64,
    epsilon: f64,
    beta_excess: f64,
) -> Result<SweepRow> {
    let mut row = SweepRow {
        regime,
        varrho,
        depth_ratio,
        vorticity_ratio: r,
        c_sign,
        beta_excess,
        status: SweepStatus::NoWave,
        m: None,
        m_prime_pointwise: None,
        m_prime_frozen: None,
        verdict_pointwise: None,
        verdict_frozen: None,
        predicted: regime.predicted(),
        matches: None,
    };
    let Some(p) = regime_params(regime, varrho, depth_ratio, r, c_sign, epsilon, beta_excess) else {
        return Ok(row);
    };
    let np = nondim_with(&p, Alpha0Mode::Pointwise)?;
    if np.frak_b.abs() <= DEGENERATE_B_TOL {
        row.status = SweepStatus::Degenerate;
        return Ok(row);
    }
    if np.polarity() != regime.polarity() {
        row.status = SweepStatus::WrongPolarity;
        return Ok(row);
    }
    let pw = classify_with(&p, Alpha0Mode::Pointwise)?;
    let fr = classify_with(&p, Alpha0Mode::Frozen { c_ref: p.c })?;
    row.status = SweepStatus::Classified;
    row.m = Some(pw.m);
    row.m_prime_pointwise = Some(pw.m_prime);
    row.m_prime_frozen = Some(fr.m_prime);
    row.verdict_pointwise = Some(pw.verdict);
    row.verdict_frozen = Some(fr.verdict);
    row.matches = Some(pw.verdict == row.predicted && fr.verdict == row.predicted);
    Ok(row)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let f = crate::fmt_f64;
    let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
    let verdict = |v: Option<Verdict>| v.map(|v| format!("{v:?}")).unwrap_or_default();
    let mut s = String::from(
        "regime,varrho,depth_ratio,vorticity_ratio,c_sign,beta_excess,status,m,m_prime_pointwise,m_prime_frozen,verdict_pointwise,verdict_frozen,predicted,matches\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:?},{}\n",
            serde_json::to_value(r.regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            f(r.varrho),
            f(r.depth_ratio),
            f(r.vorticity_ratio),
            f(r.c_sign),
            f(r.beta_excess),
            serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            opt(r.m),
            opt(r.m_prime_pointwise),
            opt(r.m_prime_frozen),
            verdict(r.verdict_pointwise),
            verdict(r.verdict_frozen),
            r.predicted,
            r.matches.map(|b| b.to_string()).unwrap_or_default(),
        ));
    }
    s
}
