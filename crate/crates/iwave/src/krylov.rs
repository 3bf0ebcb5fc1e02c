//! Restarted, right-preconditioned GMRES for the strip and interface solves.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GmresSettings {
    /// Stop when ‖b − Ax‖ ≤ rel_tol·‖b‖.
    pub rel_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// When a restart cycle stops reducing the residual, the solve ends; it
    /// succeeds if the relative residual is at most this floor.
    pub stagnation_tol: f64,
}

impl Default for GmresSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            restart: 60,
            max_iter: 600,
            stagnation_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative residual at the end of every restart cycle.
    pub history: Vec<f64>,
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves A x = b with x = M⁻¹y, starting from zero. `context` names the
/// caller in the error message.
pub fn gmres<A, P>(
    mut apply: A,
    mut precondition: P,
    b: &[f64],
    settings: &GmresSettings,
    context: &str,
) -> Result<GmresOutcome>
where
    A: FnMut(&[f64]) -> Vec<f64>,
    P: FnMut(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            solution: x,
            iterations: 0,
            history: vec![0.0],
            rel_residual: 0.0,
        });
    }
    let target = settings.rel_tol * b_norm;
    let m = settings.restart.max(1);
    let mut history = Vec::new();
    let mut iterations = 0;

    let mut r: Vec<f64> = b.to_vec();
    loop {
        let beta = norm(&r);
        history.push(beta / b_norm);
        let stalled = history.len() > 2 && {
            let prev = history[history.len() - 2];
            beta / b_norm > 0.5 * prev
        };
        if beta <= target || (stalled && beta <= settings.stagnation_tol * b_norm) {
            return Ok(GmresOutcome {
                solution: x,
                iterations,
                history,
                rel_residual: beta / b_norm,
            });
        }
        if stalled && history.len() > 4 {
            return Err(Error::numerical(format!(
                "{context}: GMRES stagnated after {iterations} iterations; \
                 relative residual history {history:?}"
            )));
        }
        if iterations >= settings.max_iter {
            return Err(Error::numerical(format!(
                "{context}: GMRES did not converge in {iterations} iterations; \
                 relative residual history {history:?}"
            )));
        }

        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut precond_basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;

        for j in 0..m {
            let z = precondition(&basis[j]);
            let mut w = apply(&z);
            precond_basis.push(z);
            // Modified Gram–Schmidt, twice for stability.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let h = dot(&w, v);
                    hess[i][j] += h;
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= h * vi);
                }
            }
            let h_next = norm(&w);
            hess[j + 1][j] = h_next;
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let denom = hess[j][j].hypot(hess[j + 1][j]);
            if denom == 0.0 {
                used = j;
                break;
            }
            cs[j] = hess[j][j] / denom;
            sn[j] = hess[j + 1][j] / denom;
            hess[j][j] = denom;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iterations += 1;
            used = j + 1;
            if g[j + 1].abs() <= target || h_next == 0.0 || iterations >= settings.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| hess[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        for (yi, z) in y.iter().zip(&precond_basis) {
            x.iter_mut().zip(z).for_each(|(xi, zi)| *xi += yi * zi);
        }
        // True residual, so the stopping test never trusts the recurrence alone.
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        if used == 0 {
            return Err(Error::numerical(format!(
                "{context}: GMRES breakdown; relative residual history {history:?}"
            )));
        }
    }
}
