//! Self-verification suites behind `iwave verify`. Each check records the
//! measured quantity, its threshold and the outcome.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dispersion::double_root_certificate;
use crate::dno_operators::{flat_symbol_g, DnoContext, Layer, PeriodicGrid};
use crate::error::Result;
use crate::functionals::{dprime_check, DprimeSettings};
use crate::params::{nondim, PhysicalParams};
use crate::spatial_linear::jordan_chain_check;

pub const JORDAN_NODES: usize = 64;
pub const OPERATOR_POINTS: usize = 64;
pub const FIRST_DERIVATIVE_CASES: usize = 20;
pub const SECOND_DERIVATIVE_CASES: usize = 10;
pub const DPRIME_EPSILONS: [f64; 3] = [0.1, 0.05, 0.025];
const SEED: u64 = 0x1f0a_77c3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Operators,
    Jordan,
    Dprime,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// value ≤ threshold
    AtMost,
    /// value ≥ threshold
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerEntry {
    pub suite: String,
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl LedgerEntry {
    fn new(suite: &str, check: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
        };
        Self { suite: suite.into(), check: check.into(), value, threshold, comparison, passed }
    }

    fn flag(suite: &str, check: &str, ok: bool) -> Self {
        Self::new(suite, check, if ok { 1.0 } else { 0.0 }, Comparison::AtLeast, 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyLedger {
    pub suite: Suite,
    pub entries: Vec<LedgerEntry>,
    pub all_passed: bool,
}

pub fn run_suite(suite: Suite, p: &PhysicalParams) -> Result<VerifyLedger> {
    let entries = match suite {
        Suite::Operators => operators(p)?,
        Suite::Jordan => jordan(p)?,
        Suite::Dprime => dprime(p)?,
        Suite::All => {
            let mut all = operators(p)?;
            all.extend(jordan(p)?);
            all.extend(dprime(p)?);
            all
        }
    };
    let all_passed = entries.iter().all(|e| e.passed);
    Ok(VerifyLedger { suite, entries, all_passed })
}

/// Σₙ (aₙ cos nκx + bₙ sin nκx)/n² with random coefficients in [−1, 1].
fn smooth_field(grid: &PeriodicGrid, rng: &mut ChaCha8Rng, n_modes: usize, scale: f64) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (0..n_modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let kappa = 2.0 * PI / grid.period;
    grid.x()
        .iter()
        .map(|x| {
            scale
                * coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let n = (i + 1) as f64;
                        (a * (n * kappa * x).cos() + b * (n * kappa * x).sin()) / (n * n)
                    })
                    .sum::<f64>()
        })
        .collect()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn operators(p: &PhysicalParams) -> Result<Vec<LedgerEntry>> {
    const SUITE: &str = "operators";
    p.validate()?;
    let grid = PeriodicGrid::new(OPERATOR_POINTS, 2.0 * PI * p.d_plus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut entries = Vec::new();

    let ctx = DnoContext::new(p, grid)?;
    let flat = vec![0.0; grid.n_points];
    for layer in [Layer::Plus, Layer::Minus] {
        let mut worst = 0.0f64;
        for n in 1..=grid.n_points / 4 {
            let k = grid.wavenumber(n);
            let sym = flat_symbol_g(k, layer, p);
            for phase in [0.0, 0.5 * PI] {
                let xi: Vec<f64> = grid.x().iter().map(|x| (k * x + phase).cos()).collect();
                let out = ctx.g(&flat, &xi, layer)?;
                let err = out.iter().zip(&xi).map(|(o, v)| (o - sym * v).abs()).fold(0.0, f64::max);
                worst = worst.max(err / sym.max(1.0));
            }
        }
        let name = format!("flat_dno_{}_matches_symbol", layer.name());
        entries.push(LedgerEntry::new(SUITE, &name, worst, Comparison::AtMost, 1e-10));
    }

    let amplitude = 0.15 * p.d_plus.min(p.d_minus);
    let mut first = 0.0f64;
    for case in 0..FIRST_DERIVATIVE_CASES {
        let q = PhysicalParams {
            d_plus: p.d_plus * (1.0 + 0.25 * rng.gen_range(-1.0..1.0)),
            d_minus: p.d_minus * (1.0 + 0.25 * rng.gen_range(-1.0..1.0)),
            ..*p
        };
        let ctx = DnoContext::new(&q, grid)?;
        let eta = smooth_field(&grid, &mut rng, 4, amplitude);
        let eta_dot = smooth_field(&grid, &mut rng, 4, 1.0);
        let xi = smooth_field(&grid, &mut rng, 6, 1.0);
        let zeta = smooth_field(&grid, &mut rng, 6, 1.0);
        let layer = if case % 2 == 0 { Layer::Plus } else { Layer::Minus };
        let h = 1e-4;
        let form = |s: f64| -> Result<f64> {
            let shifted: Vec<f64> = eta.iter().zip(&eta_dot).map(|(e, d)| e + s * d).collect();
            Ok(ctx.fourier.pairing(&zeta, &ctx.g(&shifted, &xi, layer)?))
        };
        let fd = (form(h)? - form(-h)?) / (2.0 * h);
        let formula = ctx.shape_derivative_pairing(&eta, &eta_dot, &xi, &zeta, layer)?;
        first = first.max(relative(formula, fd));
    }
    entries.push(LedgerEntry::new(SUITE, "first_shape_derivative_vs_central_difference", first, Comparison::AtMost, 1e-6));

    let mut second = 0.0f64;
    for case in 0..SECOND_DERIVATIVE_CASES {
        let eta = smooth_field(&grid, &mut rng, 3, amplitude);
        let eta_dot = smooth_field(&grid, &mut rng, 3, 1.0);
        let xi = smooth_field(&grid, &mut rng, 5, 1.0);
        let layer = if case % 2 == 0 { Layer::Plus } else { Layer::Minus };
        let h = 1e-3;
        let form = |s: f64| -> Result<f64> {
            let shifted: Vec<f64> = eta.iter().zip(&eta_dot).map(|(e, d)| e + s * d).collect();
            Ok(ctx.fourier.pairing(&xi, &ctx.g(&shifted, &xi, layer)?))
        };
        let fd = (form(h)? - 2.0 * form(0.0)? + form(-h)?) / (h * h);
        let formula = ctx.second_shape_derivative_pairing(&eta, &eta_dot, &xi, layer)?;
        second = second.max(relative(formula, fd));
    }
    entries.push(LedgerEntry::new(SUITE, "second_shape_derivative_vs_central_difference", second, Comparison::AtMost, 1e-4));

    let mut asymmetry = 0.0f64;
    for _ in 0..6 {
        let eta = smooth_field(&grid, &mut rng, 3, amplitude);
        let xi = smooth_field(&grid, &mut rng, 5, 1.0);
        let zeta = smooth_field(&grid, &mut rng, 5, 1.0);
        for layer in [Layer::Plus, Layer::Minus] {
            let lhs = ctx.fourier.pairing(&ctx.g(&eta, &xi, layer)?, &zeta);
            let rhs = ctx.fourier.pairing(&xi, &ctx.g(&eta, &zeta, layer)?);
            asymmetry = asymmetry.max((lhs - rhs).abs());
        }
        let lhs = ctx.fourier.pairing(&ctx.b(&eta, &xi)?, &zeta);
        let rhs = ctx.fourier.pairing(&xi, &ctx.b(&eta, &zeta)?);
        asymmetry = asymmetry.max((lhs - rhs).abs());
    }
    entries.push(LedgerEntry::new(SUITE, "self_adjoint_pairings", asymmetry, Comparison::AtMost, 1e-9));
    Ok(entries)
}

fn jordan(p: &PhysicalParams) -> Result<Vec<LedgerEntry>> {
    const SUITE: &str = "jordan";
    let np = nondim(p)?;
    let critical = np.with_alpha(np.alpha0);
    let report = jordan_chain_check(&critical, JORDAN_NODES)?;
    let certificate = double_root_certificate(&critical)?;
    Ok(vec![
        LedgerEntry::new(SUITE, "kernel_residual", report.kernel_residual, Comparison::AtMost, 1e-8),
        LedgerEntry::new(SUITE, "chain_residual", report.chain_residual, Comparison::AtMost, 1e-8),
        LedgerEntry::new(SUITE, "pairing_minus_beta_star", (report.pairing - report.beta_star).abs(), Comparison::AtMost, 1e-10),
        LedgerEntry::new(SUITE, "dispersion_residual_at_zero", certificate.residual_at_zero.abs(), Comparison::AtMost, 1e-12),
        LedgerEntry::new(
            SUITE,
            "double_root_curvature_vs_finite_difference",
            (certificate.second_derivative - certificate.second_derivative_fd).abs(),
            Comparison::AtMost,
            1e-6,
        ),
    ])
}

fn dprime(p: &PhysicalParams) -> Result<Vec<LedgerEntry>> {
    const SUITE: &str = "dprime";
    let report = dprime_check(p, &DPRIME_EPSILONS, &DprimeSettings::default())?;
    let first = &report.rows[0];
    let mut entries = vec![
        LedgerEntry::new(SUITE, "momentum_identity_relative_error_at_largest_epsilon", first.rel_error, Comparison::AtMost, 0.2),
        LedgerEntry::new(SUITE, "momentum_identity_fitted_order", report.fitted_order.unwrap_or(f64::NAN), Comparison::AtLeast, 0.8),
        LedgerEntry::flag(SUITE, "momentum_and_slope_signs_agree", report.sign_agreement),
    ];
    let kinematic = report.rows.iter().map(|r| r.kinematic_residual).fold(0.0, f64::max);
    entries.push(LedgerEntry::new(SUITE, "kinematic_residual", kinematic, Comparison::AtMost, crate::functionals::KINEMATIC_TOL));
    Ok(entries)
}
