//! Linearized spatial-dynamics operator in the layer-normalized vertical
//! coordinate z ∈ [0, 1], its spectrum and the Jordan chain at criticality.
//!
//! State layout: (η, γ, φ̄₊, Γ₊, φ̄₋, Γ₋) with each field sampled at the
//! Chebyshev nodes. φ̄± is the mean-free velocity potential of each layer and
//! Γ± the integrated flux perturbation, which vanishes at both z = 0 and
//! z = 1 on the domain of the operator.
//!
//! Boundary handling replaces four rows per layer: the φ̄ equation at z = 0
//! by ∂zφ̄(0) = 0, the φ̄ equation at z = 1 by ∫φ̄ = 0, and both Γ equations
//! at the ends by Γ(0) = Γ(1) = 0. The interface Neumann condition at z = 1
//! is then satisfied by every eigenvector and is reported separately.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::chebyshev::ChebGrid;
use crate::dispersion;
use crate::error::{Error, Result};
use crate::params::NondimParams;

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub eta: f64,
    pub gamma: f64,
    /// φ̄₊ at the nodes.
    pub potential_plus: Vec<f64>,
    /// Γ₊ at the nodes.
    pub flux_plus: Vec<f64>,
    pub potential_minus: Vec<f64>,
    pub flux_minus: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            eta: 0.0,
            gamma: 0.0,
            potential_plus: vec![0.0; n],
            flux_plus: vec![0.0; n],
            potential_minus: vec![0.0; n],
            flux_minus: vec![0.0; n],
        }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.potential_plus.len();
        let mut v = DVector::zeros(2 + 4 * n);
        v[0] = self.eta;
        v[1] = self.gamma;
        for (b, f) in [
            &self.potential_plus,
            &self.flux_plus,
            &self.potential_minus,
            &self.flux_minus,
        ]
        .iter()
        .enumerate()
        {
            for (i, x) in f.iter().enumerate() {
                v[2 + b * n + i] = *x;
            }
        }
        v
    }

    pub fn from_vector(v: &DVector<f64>, n: usize) -> Self {
        let block = |b: usize| (0..n).map(|i| v[2 + b * n + i]).collect::<Vec<_>>();
        Self {
            eta: v[0],
            gamma: v[1],
            potential_plus: block(0),
            flux_plus: block(1),
            potential_minus: block(2),
            flux_minus: block(3),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub params: NondimParams,
    pub grid: ChebGrid,
    /// 𝓛 collocated at every node, no rows replaced.
    pub collocated: DMatrix<f64>,
    /// Collocated matrix with boundary rows substituted.
    pub matrix: DMatrix<f64>,
    /// Indices of substituted rows (same index as the unknown they eliminate).
    pub boundary_rows: Vec<usize>,
    /// Row functional S, the linearized γ̄.
    s_row: DVector<f64>,
}

fn idx_potential(n: usize, layer: usize) -> usize {
    2 + 2 * n * layer
}

fn idx_flux(n: usize, layer: usize) -> usize {
    2 + 2 * n * layer + n
}

/// η-coefficient of the γ row. At zero vorticity this is α − ϱ − 1/d;
/// with shear the ∫Γ± terms supply the remaining part of α − α₀ on e₁.
pub fn gamma_row_eta_coefficient(np: &NondimParams) -> f64 {
    let (vr, d, sp, sm) = (np.varrho, np.d_ratio, np.shear_plus, np.shear_minus);
    np.alpha - vr * (1.0 + sp + sp * sp / 3.0) - (1.0 - sm * d + sm * sm * d * d / 3.0) / d
}

pub fn assemble(np: &NondimParams, n_nodes: usize) -> Result<DiscreteOperator> {
    if n_nodes < MIN_NODES {
        return Err(Error::invalid(format!(
            "need at least {MIN_NODES} collocation nodes, got {n_nodes}"
        )));
    }
    if !(np.beta > 0.0) {
        return Err(Error::invalid("beta must be positive"));
    }
    let grid = ChebGrid::new(n_nodes);
    let n = n_nodes;
    let dim = 2 + 4 * n;
    let (vr, d, sp, sm, beta) = (np.varrho, np.d_ratio, np.shear_plus, np.shear_minus, np.beta);
    let z = &grid.z;
    let w = &grid.weights;
    if w.iter().any(|x| !x.is_finite()) || w.iter().sum::<f64>().abs() < 0.5 {
        return Err(Error::numerical("degenerate quadrature weights"));
    }

    let (pp, fp, pm, fm) = (
        idx_potential(n, 0),
        idx_flux(n, 0),
        idx_potential(n, 1),
        idx_flux(n, 1),
    );

    let mut s_row = DVector::<f64>::zeros(dim);
    s_row[1] = 1.0;
    s_row[pp + n - 1] += vr;
    s_row[pm + n - 1] -= 1.0;
    for j in 0..n {
        s_row[pp + j] += 2.0 * sp * vr * z[j] * w[j];
        s_row[pm + j] += 2.0 * sm * d * z[j] * w[j];
    }

    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for c in 0..dim {
        a[(0, c)] = s_row[c] / beta;
    }
    a[(1, 0)] = gamma_row_eta_coefficient(np);
    for j in 0..n {
        a[(1, fp + j)] += 2.0 * sp * w[j];
        a[(1, fm + j)] += 2.0 * sm * w[j];
    }
    for i in 0..n {
        let zi = z[i];
        // φ̄₊ row
        for j in 0..n {
            a[(pp + i, fp + j)] = grid.diff[(i, j)] / vr;
        }
        a[(pp + i, 0)] += sp * (2.0 * zi - 1.0);
        // Γ₊ row
        let coupling_plus = zi * (vr - sp * vr * (zi - 1.0)) / beta;
        for c in 0..dim {
            a[(fp + i, c)] = coupling_plus * s_row[c];
        }
        for j in 0..n {
            a[(fp + i, pp + j)] -= vr * grid.diff[(i, j)];
        }
        // φ̄₋ row
        for j in 0..n {
            a[(pm + i, fm + j)] = grid.diff[(i, j)] / d;
        }
        a[(pm + i, 0)] += sm * (2.0 * zi - 1.0);
        // Γ₋ row
        let coupling_minus = zi * (-d + sm * d * d * (1.0 - zi)) / (d * beta);
        for c in 0..dim {
            a[(fm + i, c)] = coupling_minus * s_row[c];
        }
        for j in 0..n {
            a[(fm + i, pm + j)] -= grid.diff[(i, j)] / d;
        }
    }

    let collocated = a.clone();
    let mut boundary_rows = Vec::with_capacity(8);
    for (p, f) in [(pp, fp), (pm, fm)] {
        // ∂zφ̄(0) = 0
        a.row_mut(p).fill(0.0);
        for j in 0..n {
            a[(p, p + j)] = grid.diff[(0, j)];
        }
        // ∫φ̄ = 0
        a.row_mut(p + n - 1).fill(0.0);
        for j in 0..n {
            a[(p + n - 1, p + j)] = w[j];
        }
        // Γ(0) = Γ(1) = 0
        a.row_mut(f).fill(0.0);
        a[(f, f)] = 1.0;
        a.row_mut(f + n - 1).fill(0.0);
        a[(f + n - 1, f + n - 1)] = 1.0;
        boundary_rows.extend([p, p + n - 1, f, f + n - 1]);
    }

    Ok(DiscreteOperator {
        params: *np,
        grid,
        collocated,
        matrix: a,
        boundary_rows,
        s_row,
    })
}

impl DiscreteOperator {
    pub fn n_nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn dim(&self) -> usize {
        2 + 4 * self.n_nodes()
    }

    /// 𝓛u evaluated at every node.
    pub fn apply(&self, u: &StateVector) -> StateVector {
        let v = &self.collocated * u.to_vector();
        StateVector::from_vector(&v, self.n_nodes())
    }

    /// Linearized γ̄ of a state.
    pub fn s_functional(&self, u: &StateVector) -> f64 {
        self.s_row.dot(&u.to_vector())
    }

    /// Residuals of every boundary and side condition, including the
    /// interface Neumann conditions that are not imposed as rows.
    pub fn boundary_residuals(&self, u: &StateVector) -> BoundaryResiduals {
        let g = &self.grid;
        let n = self.n_nodes();
        let s = self.s_functional(u) / self.params.beta;
        let dp = g.derivative(&u.potential_plus);
        let dm = g.derivative(&u.potential_minus);
        BoundaryResiduals {
            neumann_bottom_plus: dp[0],
            neumann_bottom_minus: dm[0],
            interface_plus: dp[n - 1] - s,
            interface_minus: dm[n - 1] + self.params.d_ratio * s,
            mean_plus: g.integrate(&u.potential_plus),
            mean_minus: g.integrate(&u.potential_minus),
            flux_start_plus: u.flux_plus[0],
            flux_start_minus: u.flux_minus[0],
            flux_end_plus: u.flux_plus[n - 1],
            flux_end_minus: u.flux_minus[n - 1],
        }
    }

    fn split_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let elim = self.boundary_rows.clone();
        let keep = (0..self.dim()).filter(|i| !elim.contains(i)).collect();
        (keep, elim)
    }

    /// 𝓛 restricted to its domain, as a square matrix on the interior
    /// unknowns, plus the map from interior to eliminated unknowns.
    pub fn reduced(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (keep, elim) = self.split_indices();
        let cb = self.matrix.select_rows(&elim).select_columns(&elim);
        let ci = self.matrix.select_rows(&elim).select_columns(&keep);
        let lu = cb.lu();
        let t = lu
            .solve(&(-ci))
            .ok_or_else(|| Error::numerical("boundary block is singular"))?;
        let a = self.collocated.select_rows(&keep);
        let lred = a.select_columns(&keep) + a.select_columns(&elim) * &t;
        Ok((lred, t))
    }

    /// Lift an interior vector to the full state.
    pub fn lift(&self, interior: &DVector<f64>, t: &DMatrix<f64>) -> StateVector {
        let (keep, elim) = self.split_indices();
        let mut full = DVector::zeros(self.dim());
        for (k, &i) in keep.iter().enumerate() {
            full[i] = interior[k];
        }
        let b = t * interior;
        for (k, &i) in elim.iter().enumerate() {
            full[i] = b[k];
        }
        StateVector::from_vector(&full, self.n_nodes())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryResiduals {
    pub neumann_bottom_plus: f64,
    pub neumann_bottom_minus: f64,
    pub interface_plus: f64,
    pub interface_minus: f64,
    pub mean_plus: f64,
    pub mean_minus: f64,
    pub flux_start_plus: f64,
    pub flux_start_minus: f64,
    pub flux_end_plus: f64,
    pub flux_end_minus: f64,
}

impl BoundaryResiduals {
    pub fn max_abs(&self) -> f64 {
        [
            self.neumann_bottom_plus,
            self.neumann_bottom_minus,
            self.interface_plus,
            self.interface_minus,
            self.mean_plus,
            self.mean_minus,
            self.flux_start_plus,
            self.flux_start_minus,
            self.flux_end_plus,
            self.flux_end_minus,
        ]
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Ω̃(u, v) = γ_v η_u − η_v γ_u + Σ± ∫(∂zΓ±_v φ̄±_u − φ̄±_v ∂zΓ±_u).
pub fn symplectic_form(grid: &ChebGrid, u: &StateVector, v: &StateVector) -> f64 {
    let mut total = v.gamma * u.eta - v.eta * u.gamma;
    for (pu, fu, pv, fv) in [
        (&u.potential_plus, &u.flux_plus, &v.potential_plus, &v.flux_plus),
        (&u.potential_minus, &u.flux_minus, &v.potential_minus, &v.flux_minus),
    ] {
        let dfu = grid.derivative(fu);
        let dfv = grid.derivative(fv);
        let integrand: Vec<f64> = (0..grid.len())
            .map(|i| dfv[i] * pu[i] - pv[i] * dfu[i])
            .collect();
        total += grid.integrate(&integrand);
    }
    total
}

/// Kernel vector e₁ at criticality.
pub fn jordan_e1(np: &NondimParams, grid: &ChebGrid) -> StateVector {
    let n = grid.len();
    let mut e = StateVector::zeros(n);
    e.eta = 1.0;
    for (i, z) in grid.z.iter().enumerate() {
        e.flux_plus[i] = np.shear_plus * np.varrho * (z - z * z);
        e.flux_minus[i] = np.shear_minus * np.d_ratio * (z - z * z);
    }
    e
}

/// Generalized eigenvector e₂ with 𝓛e₂ = e₁.
pub fn jordan_e2(np: &NondimParams, grid: &ChebGrid) -> StateVector {
    let n = grid.len();
    let (vr, d) = (np.varrho, np.d_ratio);
    let mut e = StateVector::zeros(n);
    e.gamma = np.beta - (vr + d) / 3.0 - (np.shear_plus * vr - np.shear_minus * d * d) / 12.0;
    for (i, z) in grid.z.iter().enumerate() {
        let q = 0.5 * (z * z - 1.0 / 3.0);
        e.potential_plus[i] = q;
        e.potential_minus[i] = -d * q;
    }
    e
}

fn max_abs_diff(a: &StateVector, b: &StateVector) -> f64 {
    let va = a.to_vector();
    let vb = b.to_vector();
    (va - vb).amax()
}

#[derive(Debug, Clone, Serialize)]
pub struct JordanReport {
    pub n_nodes: usize,
    /// max |𝓛e₁| over all components and nodes.
    pub kernel_residual: f64,
    /// max |𝓛e₂ − e₁|.
    pub chain_residual: f64,
    /// Largest boundary/side-condition violation of e₁ and e₂.
    pub boundary_residual: f64,
    pub pairing: f64,
    pub beta_star: f64,
}

pub fn jordan_chain_check(np: &NondimParams, n_nodes: usize) -> Result<JordanReport> {
    if (np.alpha - np.alpha0).abs() > dispersion::ALPHA_CRITICAL_TOL {
        return Err(Error::invalid(format!(
            "Jordan chain requires alpha = alpha0, got alpha - alpha0 = {}",
            np.alpha - np.alpha0
        )));
    }
    let op = assemble(np, n_nodes)?;
    let e1 = jordan_e1(np, &op.grid);
    let e2 = jordan_e2(np, &op.grid);
    let l1 = op.apply(&e1);
    let l2 = op.apply(&e2);
    let kernel_residual = l1.to_vector().amax();
    let chain_residual = max_abs_diff(&l2, &e1);
    let boundary_residual = op
        .boundary_residuals(&e1)
        .max_abs()
        .max(op.boundary_residuals(&e2).max_abs());
    Ok(JordanReport {
        n_nodes,
        kernel_residual,
        chain_residual,
        boundary_residual,
        pairing: symplectic_form(&op.grid, &e1, &e2),
        beta_star: np.beta_star,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub n_nodes: usize,
    pub window: f64,
    /// (Re λ, Im λ), sorted by modulus then real then imaginary part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Dimension of the reduced eigenproblem.
    pub reduced_dim: usize,
}

impl SpectrumReport {
    pub fn complex(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect()
    }

    /// Wavenumbers k ≥ 0 of eigenvalues λ = ik (|Re λ| ≤ re_tol).
    pub fn imaginary_wavenumbers(&self, re_tol: f64) -> Vec<f64> {
        let mut ks: Vec<f64> = self
            .eigenvalues
            .iter()
            .filter(|(re, im)| re.abs() <= re_tol && *im >= 0.0)
            .map(|(_, im)| *im)
            .collect();
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ks
    }

    /// Largest distance from an eigenvalue to the nearest of −λ, λ̄ and −λ̄,
    /// over eigenvalues with modulus at most `radius`.
    pub fn quadruple_defect(&self, radius: f64) -> f64 {
        let all = self.complex();
        let nearest = |target: Complex64| {
            all.iter()
                .map(|x| (x - target).norm())
                .fold(f64::INFINITY, f64::min)
        };
        all.iter()
            .filter(|l| l.norm() <= radius)
            .map(|l| nearest(-l).max(nearest(l.conj())).max(nearest(-l.conj())))
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of 𝓛 in the box |Re λ|, |Im λ| ≤ window.
pub fn spectrum(op: &DiscreteOperator, window: f64) -> Result<SpectrumReport> {
    if !(window > 0.0) {
        return Err(Error::invalid("window must be positive"));
    }
    let (lred, _) = op.reduced()?;
    let reduced_dim = lred.nrows();
    if lred.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("non-finite entries in reduced operator"));
    }
    let schur = lred
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| Error::numerical("Schur iteration did not converge"))?;
    let ev = schur.complex_eigenvalues();
    if ev.len() != reduced_dim {
        return Err(Error::numerical("eigensolver returned an incomplete spectrum"));
    }
    let mut eigenvalues: Vec<(f64, f64)> = ev
        .iter()
        .filter(|l| l.re.abs() <= window && l.im.abs() <= window)
        .map(|l| (l.re, l.im))
        .collect();
    eigenvalues.sort_by(|a, b| {
        let na = a.0.hypot(a.1);
        let nb = b.0.hypot(b.1);
        na.partial_cmp(&nb)
            .unwrap()
            .then(a.0.partial_cmp(&b.0).unwrap())
            .then(a.1.partial_cmp(&b.1).unwrap())
    });
    Ok(SpectrumReport {
        n_nodes: op.n_nodes(),
        window,
        eigenvalues,
        reduced_dim,
    })
}

/// Number of singular values of the reduced operator below `tol·σ_max`.
pub fn kernel_dimension(op: &DiscreteOperator, tol: f64) -> Result<usize> {
    let (lred, _) = op.reduced()?;
    let sv = lred.singular_values();
    let smax = sv.max();
    Ok(sv.iter().filter(|s| **s <= tol * smax).count())
}

/// Max distance between the positive imaginary parts of near-imaginary
/// eigenvalues and the nearest dispersion root, and vice versa for roots in
/// (0, window]. Returns (eigen-to-root, root-to-eigen).
pub fn dispersion_mismatch(report: &SpectrumReport, np: &NondimParams) -> Result<(f64, f64)> {
    let roots = dispersion::find_roots(np, report.window, 20_001)?;
    let ks = report.imaginary_wavenumbers(1e-6);
    let nearest = |x: f64, set: &[f64]| set.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
    let e2r = ks.iter().map(|k| nearest(*k, &roots)).fold(0.0, f64::max);
    let r2e = roots
        .iter()
        .filter(|r| **r > 1e-6)
        .map(|r| nearest(*r, &ks))
        .fold(0.0, f64::max);
    Ok((e2r, r2e))
}
