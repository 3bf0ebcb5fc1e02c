//! Chebyshev–Lobatto nodes on [0, 1], the collocation derivative matrix and
//! Clenshaw–Curtis weights.

use nalgebra::DMatrix;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct ChebGrid {
    /// Nodes in increasing order, z[0] = 0 and z[n-1] = 1.
    pub z: Vec<f64>,
    /// d/dz on nodal values.
    pub diff: DMatrix<f64>,
    /// Quadrature weights for ∫₀¹.
    pub weights: Vec<f64>,
}

impl ChebGrid {
    /// Grid with `n_nodes` points (polynomial degree n_nodes - 1).
    pub fn new(n_nodes: usize) -> Self {
        assert!(n_nodes >= 3, "need at least three Chebyshev nodes");
        let n = n_nodes - 1;
        // Reference nodes x_j = cos(πj/n) on [-1, 1]; z = (1 - x)/2 puts z_0 = 0.
        let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
        let cw: Vec<f64> = (0..=n)
            .map(|j| {
                let edge = if j == 0 || j == n { 2.0 } else { 1.0 };
                if j % 2 == 0 {
                    edge
                } else {
                    -edge
                }
            })
            .collect();
        let mut dx = DMatrix::<f64>::zeros(n_nodes, n_nodes);
        for i in 0..n_nodes {
            let mut row_sum = 0.0;
            for j in 0..n_nodes {
                if i != j {
                    let v = cw[i] / cw[j] / (x[i] - x[j]);
                    dx[(i, j)] = v;
                    row_sum += v;
                }
            }
            dx[(i, i)] = -row_sum;
        }
        let z: Vec<f64> = x.iter().map(|xi| 0.5 * (1.0 - xi)).collect();
        let diff = dx * -2.0;
        let weights = clenshaw_curtis(n).into_iter().map(|w| 0.5 * w).collect();
        Self { z, diff, weights }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.diff[(i, j)] * f[j]).sum())
            .collect()
    }
}

/// Clenshaw–Curtis weights on [-1, 1] for nodes cos(πj/n), j = 0..=n.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        w[0] = 2.0;
        return w;
    }
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / nf).collect();
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_is_exact_for_low_degree() {
        for n in [5, 16, 33] {
            let g = ChebGrid::new(n);
            for p in 0..n.min(10) {
                let f: Vec<f64> = g.z.iter().map(|z| z.powi(p as i32)).collect();
                assert!((g.integrate(&f) - 1.0 / (p as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_of_cubic() {
        let g = ChebGrid::new(12);
        let f: Vec<f64> = g.z.iter().map(|z| z * z * z - 2.0 * z).collect();
        let df = g.derivative(&f);
        for (z, d) in g.z.iter().zip(df) {
            assert!((d - (3.0 * z * z - 2.0)).abs() < 1e-12);
        }
    }
}
