//! Truncated planar system on the center manifold, its homoclinic orbit and
//! a fixed-step RK4 integrator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::NondimParams;

pub const BLOWUP_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub q: f64,
    pub p: f64,
    pub x: f64,
}

/// Map between rescaled (Q, P, X) and center-manifold coordinates (q, p, x):
/// q = β*²ε²Q, p = ε³β*^{3/2}P, X = εx/√β*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rescaling {
    pub beta_star: f64,
    pub epsilon: f64,
}

impl Rescaling {
    pub fn q_scale(&self) -> f64 {
        self.beta_star.powi(2) * self.epsilon.powi(2)
    }

    pub fn p_scale(&self) -> f64 {
        self.epsilon.powi(3) * self.beta_star.powf(1.5)
    }

    /// X per unit x.
    pub fn x_scale(&self) -> f64 {
        self.epsilon / self.beta_star.sqrt()
    }

    /// η carried by the q f₁ component, in units of the upper depth.
    pub fn eta_from_q(&self, q_rescaled: f64) -> f64 {
        self.q_scale() * q_rescaled / self.beta_star.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedSystem {
    pub coeff_k: f64,
    /// Amplitude parameter, kept for diagnostics and rescaling only.
    pub epsilon: Option<f64>,
    pub rescaling: Option<Rescaling>,
}

impl ReducedSystem {
    pub fn new(coeff_k: f64) -> Self {
        Self {
            coeff_k,
            epsilon: None,
            rescaling: None,
        }
    }

    pub fn from_params(np: &NondimParams) -> Result<Self> {
        if !np.beta_supercritical() {
            return Err(Error::invalid("reduced system needs beta > beta0"));
        }
        let coeff_k = np
            .coeff_k
            .ok_or_else(|| Error::invalid("K undefined for beta <= beta0"))?;
        let rescaling = np.epsilon.map(|epsilon| Rescaling {
            beta_star: np.beta_star,
            epsilon,
        });
        Ok(Self {
            coeff_k,
            epsilon: np.epsilon,
            rescaling,
        })
    }

    /// Nontrivial equilibrium Q = −2/(3K).
    pub fn center_equilibrium(&self) -> Result<f64> {
        if self.coeff_k == 0.0 {
            return Err(Error::invalid("K = 0 has no nontrivial equilibrium"));
        }
        Ok(-2.0 / (3.0 * self.coeff_k))
    }

    /// Jacobian of the vector field at Q.
    pub fn jacobian(&self, q: f64) -> [[f64; 2]; 2] {
        [[0.0, 1.0], [1.0 + 3.0 * self.coeff_k * q, 0.0]]
    }
}

pub fn vector_field(s: &ReducedState, sys: &ReducedSystem) -> (f64, f64) {
    (s.p, s.q + 1.5 * sys.coeff_k * s.q * s.q)
}

pub fn homoclinic(x: f64, sys: &ReducedSystem) -> Result<ReducedState> {
    if sys.coeff_k == 0.0 {
        return Err(Error::invalid("homoclinic requires K != 0"));
    }
    let sech = 1.0 / (0.5 * x).cosh();
    let sech2 = sech * sech;
    let th = (0.5 * x).tanh();
    Ok(ReducedState {
        q: -sech2 / sys.coeff_k,
        p: sech2 * th / sys.coeff_k,
        x,
    })
}

/// Closed-form X-derivative of the homoclinic, (Q′, P′).
pub fn homoclinic_derivative(x: f64, sys: &ReducedSystem) -> Result<(f64, f64)> {
    if sys.coeff_k == 0.0 {
        return Err(Error::invalid("homoclinic requires K != 0"));
    }
    let sech = 1.0 / (0.5 * x).cosh();
    let sech2 = sech * sech;
    let th = (0.5 * x).tanh();
    let k = sys.coeff_k;
    let dq = sech2 * th / k;
    let dp = 0.5 * sech2 * (sech2 - 2.0 * th * th) / k;
    Ok((dq, dp))
}

pub fn reduced_hamiltonian(s: &ReducedState, sys: &ReducedSystem) -> f64 {
    0.5 * s.p * s.p - 0.5 * s.q * s.q - 0.5 * sys.coeff_k * s.q.powi(3)
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub states: Vec<ReducedState>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &ReducedState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn energy_drift(&self) -> f64 {
        let h0 = self.energies[0];
        self.energies
            .iter()
            .map(|h| (h - h0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("X,Q,P,H\n");
        for (st, h) in self.states.iter().zip(&self.energies) {
            s.push_str(&format!(
                "{},{},{},{}\n",
                crate::fmt_f64(st.x),
                crate::fmt_f64(st.q),
                crate::fmt_f64(st.p),
                crate::fmt_f64(*h)
            ));
        }
        s
    }
}

/// Fixed-step RK4 from `s0.x` to `x_end`. The step is shrunk slightly so
/// the endpoint is hit exactly.
pub fn integrate(s0: ReducedState, sys: &ReducedSystem, x_end: f64, step: f64) -> Result<Trajectory> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid("step must be positive"));
    }
    let span = x_end - s0.x;
    let n = ((span.abs() / step).ceil() as usize).max(1);
    let h = span / n as f64;
    let mut states = Vec::with_capacity(n + 1);
    let mut energies = Vec::with_capacity(n + 1);
    let mut s = s0;
    states.push(s);
    energies.push(reduced_hamiltonian(&s, sys));
    for i in 1..=n {
        let f = |q: f64, p: f64| vector_field(&ReducedState { q, p, x: 0.0 }, sys);
        let (k1q, k1p) = f(s.q, s.p);
        let (k2q, k2p) = f(s.q + 0.5 * h * k1q, s.p + 0.5 * h * k1p);
        let (k3q, k3p) = f(s.q + 0.5 * h * k2q, s.p + 0.5 * h * k2p);
        let (k4q, k4p) = f(s.q + h * k3q, s.p + h * k3p);
        s = ReducedState {
            q: s.q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            p: s.p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            x: s0.x + h * i as f64,
        };
        if !(s.q.abs() + s.p.abs() <= BLOWUP_BOUND) {
            return Err(Error::numerical(format!(
                "trajectory blew up at X = {} (|Q|+|P| = {})",
                s.x,
                s.q.abs() + s.p.abs()
            )));
        }
        states.push(s);
        energies.push(reduced_hamiltonian(&s, sys));
    }
    Ok(Trajectory { states, energies })
}
