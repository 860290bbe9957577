use nalgebra::DMatrix;

use super::{Discrete, ProblemParams};
use crate::error::{FracError, Result};
use crate::spectral::SpectralField;

fn smallest(mut m: DMatrix<f64>, k: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(FracError::LinearAlgebra("non-finite eigenvalue".into()));
    }
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.truncate(k.min(n));
    Ok(ev)
}

/// The `k` smallest eigenvalues `μ` of `(−Δ)^{α/2} φ − f'_λ(w) φ = μ φ`.
pub fn linearized_eigen(w: &SpectralField, pp: &ProblemParams, k: usize) -> Result<Vec<f64>> {
    let d = Discrete::new(pp, &w.basis)?;
    smallest(d.jacobian_from_values(&d.values(&w.coeffs)), k)
}

/// Same eigenproblem with an explicit potential given on the default grid.
pub fn linearized_eigen_with_potential(
    basis: &std::sync::Arc<crate::spectral::Eigenbasis>,
    pp: &ProblemParams,
    potential: &[f64],
    k: usize,
) -> Result<Vec<f64>> {
    let d = Discrete::new(pp, basis)?;
    if potential.len() != d.weights().len() {
        return Err(FracError::ShapeMismatch {
            expected: format!("{} grid values", d.weights().len()),
            found: potential.len().to_string(),
        });
    }
    let mut m = -d.potential_matrix(potential);
    for (i, dj) in d.diag.iter().enumerate() {
        m[(i, i)] += dj;
    }
    smallest(m, k)
}

/// Whether `J + εI` admits a Cholesky factorisation, i.e. `μ₁ > −ε`.
pub(crate) fn is_stable(d: &Discrete, values: &[f64], eps: f64) -> bool {
    let mut j = d.jacobian_from_values(values);
    let n = j.nrows();
    for i in 0..n {
        for c in 0..i {
            let s = 0.5 * (j[(i, c)] + j[(c, i)]);
            j[(i, c)] = s;
            j[(c, i)] = s;
        }
        j[(i, i)] += eps;
    }
    j.cholesky().is_some()
}
