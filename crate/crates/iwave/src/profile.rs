//! Leading-order solitary-wave profile η(x) = d₊ε² sech²(εx/(2d₊√β*))/𝔅.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{nondim, NondimParams, PhysicalParams, Polarity};
use crate::reduced_dynamics::{homoclinic, ReducedSystem};

pub const MAX_EPSILON: f64 = 0.5;
pub const DEFAULT_POINTS: usize = 4096;
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct WaveProfile {
    pub x_grid: Vec<f64>,
    pub eta: Vec<f64>,
    pub epsilon: f64,
    pub polarity: Polarity,
    pub decay_scale: f64,
    /// η(0) = d₊ε²/𝔅.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProfileOutcome {
    Wave(WaveProfile),
    /// |𝔅| ≤ 1e-12: no leading-order wave.
    Degenerate { frak_b: f64 },
}

impl ProfileOutcome {
    pub fn wave(self) -> Result<WaveProfile> {
        match self {
            ProfileOutcome::Wave(w) => Ok(w),
            ProfileOutcome::Degenerate { frak_b } => Err(Error::invalid(format!(
                "degenerate coefficient B = {frak_b}: no leading-order wave"
            ))),
        }
    }
}

pub fn polarity(np: &NondimParams) -> Polarity {
    np.polarity()
}

/// Symmetric grid of `n` points on [−half_width, half_width]; exactly odd
/// under reversal.
pub fn symmetric_grid(half_width: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| half_width * (2.0 * i as f64 - m) / m)
        .collect()
}

struct Checked {
    np: NondimParams,
    epsilon: f64,
    decay_scale: f64,
}

fn check(p: &PhysicalParams) -> Result<std::result::Result<Checked, f64>> {
    let np = nondim(p)?;
    if !np.beta_supercritical() {
        return Err(Error::invalid(format!(
            "profile requires beta > beta0 (beta - beta0 = {})",
            np.beta_star
        )));
    }
    let epsilon = np.epsilon_or_err()?;
    if epsilon > MAX_EPSILON {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} outside (0, {MAX_EPSILON}]"
        )));
    }
    if np.polarity() == Polarity::Degenerate {
        return Ok(Err(np.frak_b));
    }
    let decay_scale = 2.0 * p.d_plus * np.beta_star.sqrt() / epsilon;
    Ok(Ok(Checked {
        np,
        epsilon,
        decay_scale,
    }))
}

pub fn default_grid(p: &PhysicalParams) -> Result<Vec<f64>> {
    match check(p)? {
        Ok(c) => Ok(symmetric_grid(DEFAULT_HALF_WIDTH * c.decay_scale, DEFAULT_POINTS)),
        Err(frak_b) => Err(Error::invalid(format!(
            "degenerate coefficient B = {frak_b}: no decay scale"
        ))),
    }
}

pub fn leading_order(p: &PhysicalParams, x_grid: Option<Vec<f64>>) -> Result<ProfileOutcome> {
    let c = match check(p)? {
        Ok(c) => c,
        Err(frak_b) => return Ok(ProfileOutcome::Degenerate { frak_b }),
    };
    let x_grid =
        x_grid.unwrap_or_else(|| symmetric_grid(DEFAULT_HALF_WIDTH * c.decay_scale, DEFAULT_POINTS));
    let amplitude = p.d_plus * c.epsilon * c.epsilon / c.np.frak_b;
    let eta = x_grid
        .iter()
        .map(|x| {
            let s = 1.0 / (x / c.decay_scale).cosh();
            amplitude * s * s
        })
        .collect();
    Ok(ProfileOutcome::Wave(WaveProfile {
        x_grid,
        eta,
        epsilon: c.epsilon,
        polarity: c.np.polarity(),
        decay_scale: c.decay_scale,
        amplitude,
    }))
}

/// Same profile reconstructed through the homoclinic Q(X) and the
/// rescaling q = β*²ε²Q along e₁.
pub fn profile_from_reduced(
    sys: &ReducedSystem,
    p: &PhysicalParams,
    x_grid: Option<Vec<f64>>,
) -> Result<ProfileOutcome> {
    let c = match check(p)? {
        Ok(c) => c,
        Err(frak_b) => return Ok(ProfileOutcome::Degenerate { frak_b }),
    };
    let rescaling = sys
        .rescaling
        .ok_or_else(|| Error::invalid("reduced system carries no rescaling"))?;
    let x_grid =
        x_grid.unwrap_or_else(|| symmetric_grid(DEFAULT_HALF_WIDTH * c.decay_scale, DEFAULT_POINTS));
    let to_big_x = rescaling.x_scale() / p.d_plus;
    let mut eta = Vec::with_capacity(x_grid.len());
    for x in &x_grid {
        let s = homoclinic(x * to_big_x, sys)?;
        eta.push(p.d_plus * rescaling.eta_from_q(s.q));
    }
    let amplitude = p.d_plus * rescaling.eta_from_q(homoclinic(0.0, sys)?.q);
    Ok(ProfileOutcome::Wave(WaveProfile {
        x_grid,
        eta,
        epsilon: rescaling.epsilon,
        polarity: if amplitude > 0.0 {
            Polarity::Elevation
        } else {
            Polarity::Depression
        },
        decay_scale: 2.0 / to_big_x,
        amplitude,
    }))
}

impl WaveProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,eta\n");
        for (x, e) in self.x_grid.iter().zip(&self.eta) {
            s.push_str(&format!("{},{}\n", crate::fmt_f64(*x), crate::fmt_f64(*e)));
        }
        s
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "amplitude": self.amplitude,
            "decay_scale": self.decay_scale,
            "epsilon": self.epsilon,
            "n_points": self.x_grid.len(),
            "polarity": self.polarity,
        })
    }
}
