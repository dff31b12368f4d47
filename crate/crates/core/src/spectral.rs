//! Symmetric eigendecomposition and Mercer-expansion machinery.
//!
//! The weighted eigenproblem sum_j w_j K(x_i,x_j) e(x_j) = lambda e(x_i) is
//! turned into a standard symmetric one through B = W^{1/2} A W^{1/2} and
//! solved by cyclic-by-rows Jacobi rotations. Eigenfunctions come back
//! weight-orthonormal at the nodes and extend off-grid by the Nystrom
//! formula e(x) = (1/lambda) sum_j w_j K(x, x_j) e(x_j).

use crate::error::{Error, Result};
use crate::io;
use crate::kernels::KernelSpec;
use crate::mat::Mat;
use crate::nystrom::{compose, DiscreteOperator};
use crate::quadrature::{EvalGrid, QuadratureRule};
use serde_json::{json, Value};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
/// symmetric matrix, by cyclic Jacobi. Ties keep the pre-sort order; each
/// eigenvector is sign-fixed so its largest-magnitude entry is positive.
/// Deterministic: identical input bits give identical output bits.
pub fn jacobi_eigh(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::invalid("eigendecomposition needs a square matrix".to_string()));
    }
    if !a.is_finite() {
        return Err(Error::numerical("matrix has non-finite entries".to_string()));
    }
    if a.symmetry_residual() > JACOBI_TOL * a.max_abs() {
        return Err(Error::invalid("matrix is not symmetric".to_string()));
    }
    let mut b = a.clone();
    // exact symmetry for the sweep arithmetic
    for i in 0..n {
        for j in (i + 1)..n {
            b[(j, i)] = b[(i, j)];
        }
    }
    let mut v = Mat::identity(n);
    let norm = b.frobenius();
    let tol = JACOBI_TOL * norm;

    let off_diag = |b: &Mat| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += 2.0 * b[(i, j)] * b[(i, j)];
            }
        }
        acc.sqrt()
    };

    let mut converged = off_diag(&b) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::numerical(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = b[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = b[(p, p)];
                let aqq = b[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = b[(k, p)];
                    let akq = b[(k, q)];
                    let new_p = c * akp - s * akq;
                    let new_q = s * akp + c * akq;
                    b[(k, p)] = new_p;
                    b[(p, k)] = new_p;
                    b[(k, q)] = new_q;
                    b[(q, k)] = new_q;
                }
                b[(p, p)] = app - t * apq;
                b[(q, q)] = aqq + t * apq;
                b[(p, q)] = 0.0;
                b[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diag(&b) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| b[(j, j)].total_cmp(&b[(i, i)]).then(i.cmp(&j)));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Mat::zeros(n, n);
    for (slot, &idx) in order.iter().enumerate() {
        eigenvalues.push(b[(idx, idx)]);
        let mut peak = 0usize;
        let mut peak_abs = -1.0;
        for k in 0..n {
            let a = v[(k, idx)].abs();
            if a > peak_abs {
                peak_abs = a;
                peak = k;
            }
        }
        let flip = if v[(peak, idx)] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[(k, slot)] = flip * v[(k, idx)];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Descending eigenvalues with weight-orthonormal eigenfunctions at the
/// rule nodes, plus the source spec for Nystrom extension off the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    rule: QuadratureRule,
    eigenvalues: Vec<f64>,
    eigenfunctions: Mat,
    source: Option<KernelSpec>,
    tol_clip: f64,
    node_trace: f64,
}

/// Similarity transform that turns the weighted eigenproblem into a
/// standard symmetric one: B[i][j] = sqrt(w_i) K(x_i, x_j) sqrt(w_j).
/// B inherits the symmetry of the samples.
pub fn symmetrized_matrix(op: &DiscreteOperator) -> Mat {
    let n = op.len();
    let sqrt_w: Vec<f64> = op.rule().weights().iter().map(|x| x.sqrt()).collect();
    let mut b = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = sqrt_w[i] * op.samples()[(i, j)] * sqrt_w[j];
        }
    }
    b
}

/// Eigendecomposes a symmetric discrete operator.
pub fn eigendecompose(op: &DiscreteOperator) -> Result<SpectralDecomposition> {
    if !op.symmetric() {
        return Err(Error::invalid("eigendecomposition requires a symmetric operator".to_string()));
    }
    let n = op.len();
    let w = op.rule().weights();
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let b = symmetrized_matrix(op);
    let (eigenvalues, vectors) = jacobi_eigh(&b)?;
    let mut eigenfunctions = Mat::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            eigenfunctions[(i, k)] = vectors[(i, k)] / sqrt_w[i];
        }
    }
    let tol_clip = 1e-12 * eigenvalues.first().map_or(1.0, |l| l.abs()).max(1.0);
    Ok(SpectralDecomposition {
        rule: op.rule().clone(),
        eigenvalues,
        eigenfunctions,
        source: op.source().cloned(),
        tol_clip,
        node_trace: op.trace_diag(),
    })
}

/// Structured result of a Mercer-expansion check over an evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MercerReport {
    /// Number of leading eigenpairs used in the reconstruction.
    pub terms: usize,
    /// sup over grid x grid of |sum_{n<=terms} lambda_n e_n(x) e_n(y) - K(x,y)|.
    pub sup_error: f64,
    /// sup over the grid of the diagonal tail sum_{n>terms} lambda_n e_n(x)^2.
    pub diag_tail: f64,
    /// |sum_n lambda_n - sum_i w_i K(x_i, x_i)|.
    pub trace_gap: f64,
    pub min_eigenvalue: f64,
}

impl MercerReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "terms": self.terms,
            "sup_error": self.sup_error,
            "diag_tail": self.diag_tail,
            "trace_gap": self.trace_gap,
            "min_eigenvalue": self.min_eigenvalue,
        })
    }

    pub fn to_json(&self) -> String {
        io::canonical_json(&self.to_json_value())
    }
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// e_n(x_i) for eigenpair index n (0-based, descending eigenvalues).
    pub fn eigenfunction_at_node(&self, node: usize, n: usize) -> f64 {
        self.eigenfunctions[(node, n)]
    }

    pub fn eigenfunctions(&self) -> &Mat {
        &self.eigenfunctions
    }

    pub fn source(&self) -> Option<&KernelSpec> {
        self.source.as_ref()
    }

    /// Eigenvalues at or below this are treated as zero for extension and
    /// fractional powers (Jacobi noise floor).
    pub fn tol_clip(&self) -> f64 {
        self.tol_clip
    }

    /// Quadrature trace of the source samples, kept for the trace-identity
    /// diagnostic.
    pub fn node_trace(&self) -> f64 {
        self.node_trace
    }

    fn kernel_row(&self, x: f64) -> Result<Vec<f64>> {
        let spec = self.source.as_ref().ok_or_else(|| {
            Error::invalid("decomposition has no kernel evaluator; off-grid extension is unavailable".to_string())
        })?;
        self.rule.nodes().iter().map(|&z| spec.eval(x, z)).collect()
    }

    /// Coefficients c_n(x) = sum_j w_j K(x, x_j) e_n(x_j) for every n.
    fn coefficients(&self, x: f64) -> Result<Vec<f64>> {
        let kx = self.kernel_row(x)?;
        Ok(self.coefficients_from_row(&kx))
    }

    fn coefficients_from_row(&self, kx: &[f64]) -> Vec<f64> {
        let n = self.len();
        let w = self.rule.weights();
        let mut coeffs = vec![0.0; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                acc += w[j] * (kx[j] * self.eigenfunctions[(j, k)]);
            }
            *c = acc;
        }
        coeffs
    }

    /// Nystrom extension of eigenfunction `n` to any x in the closed
    /// interval: (1/lambda_n) sum_j w_j K(x, x_j) e_n(x_j). Defined only
    /// for eigenvalues above the clip tolerance.
    pub fn nystrom_extend(&self, n: usize, x: f64) -> Result<f64> {
        if n >= self.len() {
            return Err(Error::invalid(format!("eigenpair index {n} out of range")));
        }
        let lambda = self.eigenvalues[n];
        if lambda <= self.tol_clip {
            return Err(Error::DegenerateEigenvalue { index: n, value: lambda });
        }
        let kx = self.kernel_row(x)?;
        let w = self.rule.weights();
        let mut acc = 0.0;
        for j in 0..self.len() {
            acc += w[j] * (kx[j] * self.eigenfunctions[(j, n)]);
        }
        Ok(acc / lambda)
    }

    /// Partial Mercer sum sum_{n < terms} lambda_n e_n(x) e_n(y) using
    /// extended eigenfunctions; clipped eigenvalues are skipped.
    pub fn mercer_reconstruct(&self, terms: usize, x: f64, y: f64) -> Result<f64> {
        if terms > self.len() {
            return Err(Error::invalid(format!(
                "terms {terms} exceeds dimension {}",
                self.len()
            )));
        }
        if terms == 0 {
            return Ok(0.0);
        }
        let cx = self.coefficients(x)?;
        let cy = self.coefficients(y)?;
        let mut acc = 0.0;
        for n in 0..terms {
            let lambda = self.eigenvalues[n];
            if lambda > self.tol_clip {
                // lambda * ext(x) * ext(y) = c_n(x) c_n(y) / lambda
                acc += (cx[n] * cy[n]) / lambda;
            }
        }
        Ok(acc)
    }

    /// Reconstruction and tail diagnostics over a grid.
    pub fn mercer_report(&self, terms: usize, grid: &EvalGrid) -> Result<MercerReport> {
        if terms > self.len() {
            return Err(Error::invalid(format!(
                "terms {terms} exceeds dimension {}",
                self.len()
            )));
        }
        if !grid.interval().matches(self.rule.interval()) {
            return Err(Error::invalid("grid interval does not match the rule interval".to_string()));
        }
        let spec = self.source.as_ref().ok_or_else(|| {
            Error::invalid("mercer report needs a kernel evaluator".to_string())
        })?;
        let pts = grid.points();
        let coeff_rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|&x| self.coefficients(x))
            .collect::<Result<_>>()?;

        let kept: Vec<usize> = (0..self.len())
            .filter(|&n| self.eigenvalues[n] > self.tol_clip)
            .collect();
        let mut sup_error = 0.0f64;
        for (p, &x) in pts.iter().enumerate() {
            for (q, &y) in pts.iter().enumerate() {
                let mut recon = 0.0;
                for &n in kept.iter().filter(|&&n| n < terms) {
                    recon += (coeff_rows[p][n] * coeff_rows[q][n]) / self.eigenvalues[n];
                }
                sup_error = sup_error.max((recon - spec.eval(x, y)?).abs());
            }
        }
        let mut diag_tail = 0.0f64;
        for row in &coeff_rows {
            let mut tail = 0.0;
            for &n in kept.iter().filter(|&&n| n >= terms) {
                tail += (row[n] * row[n]) / self.eigenvalues[n];
            }
            diag_tail = diag_tail.max(tail);
        }
        let eig_sum: f64 = self.eigenvalues.iter().sum();
        Ok(MercerReport {
            terms,
            sup_error,
            diag_tail,
            trace_gap: (eig_sum - self.node_trace).abs(),
            min_eigenvalue: self.eigenvalues.last().copied().unwrap_or(0.0),
        })
    }

    /// Operator power T^alpha through the eigenexpansion:
    /// samples = sum_n lambda_n^alpha e_n(x_i) e_n(x_j), eigenvalues at or
    /// below the clip treated as zero. Requires a positive operator.
    pub fn fractional_power(&self, alpha: f64) -> Result<DiscreteOperator> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("power must be positive, got {alpha}")));
        }
        let min = self.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -self.tol_clip {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let n = self.len();
        let powered: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > self.tol_clip { l.powf(alpha) } else { 0.0 })
            .collect();
        let mut samples = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (k, p) in powered.iter().enumerate() {
                    if *p != 0.0 {
                        acc += p * (self.eigenfunctions[(i, k)] * self.eigenfunctions[(j, k)]);
                    }
                }
                samples[(i, j)] = acc;
            }
        }
        DiscreteOperator::new(self.rule.clone(), samples, true, None)
    }

    /// sup over the grid of sum_{n >= from} c_n(x)^2, with `from` 1-based;
    /// from = 1 gives the full coefficient sum ||k_x||^2 (Parseval).
    pub fn coefficient_tail(&self, from: usize, grid: &EvalGrid) -> Result<f64> {
        if from == 0 || from > self.len() {
            return Err(Error::invalid(format!(
                "tail start {from} must be in 1..={}",
                self.len()
            )));
        }
        if !grid.interval().matches(self.rule.interval()) {
            return Err(Error::invalid("grid interval does not match the rule interval".to_string()));
        }
        let mut sup = 0.0f64;
        for &x in grid.points() {
            let coeffs = self.coefficients(x)?;
            let tail: f64 = coeffs[from - 1..].iter().map(|c| c * c).sum();
            sup = sup.max(tail);
        }
        Ok(sup)
    }
}

/// Partial-sum check of the nonsymmetric product expansion: with a basis
/// {e_n} from a symmetric reference operator, u_n = T2 e_n and v_n = T1 e_n,
/// the sums sum_{n < terms} u_n (x) v_n (y) converge to the kernel of
/// T2 T1*. Returns the sup-norm gap at the given truncation.
pub fn reconstruct_product(
    basis: &SpectralDecomposition,
    op2: &DiscreteOperator,
    op1: &DiscreteOperator,
    terms: usize,
) -> Result<f64> {
    if !op2.rule().compatible_with(basis.rule()) || !op1.rule().compatible_with(basis.rule()) {
        return Err(Error::invalid("product reconstruction requires a shared rule".to_string()));
    }
    if terms > basis.len() {
        return Err(Error::invalid(format!(
            "terms {terms} exceeds dimension {}",
            basis.len()
        )));
    }
    let n = basis.len();
    let reference = compose(op2, &op1.adjoint())?;
    let mut partial = Mat::zeros(n, n);
    for k in 0..terms {
        let e_k = basis.eigenfunctions.column(k);
        let u = op2.apply(&e_k)?;
        let v = op1.apply(&e_k)?;
        for i in 0..n {
            for j in 0..n {
                partial[(i, j)] += u[i] * v[j];
            }
        }
    }
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            sup = sup.max((partial[(i, j)] - reference.samples()[(i, j)]).abs());
        }
    }
    Ok(sup)
}
