use std::sync::Arc;

use serde::Serialize;

use super::{
    linearized_eigen_with_potential, solve_concave, Discrete, ProblemParams, POTENTIAL_CEILING,
    POTENTIAL_FLOOR,
};
use crate::error::{FracError, Result};
use crate::spectral::Eigenbasis;

/// Fraction by which the computed radius is shrunk.
pub const SMALLNORM_SAFETY: f64 = 0.1;

/// Radius `A` of the sup-norm ball holding at most one solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmallNormThreshold {
    /// First eigenvalue of `(−Δ)^{α/2} − q z^{q−1}` with `z` the concave solution at λ = 1.
    pub beta: f64,
    /// `(1 − SMALLNORM_SAFETY) (β/p)^{1/(p−1)}`.
    pub a_threshold: f64,
}

/// Threshold below which two solutions cannot coexist.
///
/// If `u ≥ v_λ` both solve the problem with `‖u‖∞ ≤ A`, the difference
/// satisfies a linear inequality whose potential is dominated by
/// `λq v_λ^{q−1} + pA^{p−1}`. With `v_λ = λ^{1/(1−q)} z` the first term is
/// `q z^{q−1}` for every λ, so `pA^{p−1} < β` forces the difference to vanish.
pub fn smallnorm_threshold(
    pp: &ProblemParams,
    basis: &Arc<Eigenbasis>,
) -> Result<SmallNormThreshold> {
    let z = solve_concave(1.0, pp, basis, 1e-12)?;
    let p1 = pp.with_lambda(1.0);
    let d = Discrete::new(&p1, basis)?;
    let pot: Vec<f64> = d
        .values(&z.solution.coeffs)
        .iter()
        .map(|&s| (pp.q_exp * s.max(POTENTIAL_FLOOR).powf(pp.q_exp - 1.0)).min(POTENTIAL_CEILING))
        .collect();
    let beta = linearized_eigen_with_potential(basis, pp, &pot, 1)?[0];
    if !(beta > 0.0) {
        return Err(FracError::Inconsistent(format!(
            "linearisation at the concave solution is not positive (beta = {beta:e})"
        )));
    }
    let a_threshold = (1.0 - SMALLNORM_SAFETY) * (beta / pp.p_exp).powf(1.0 / (pp.p_exp - 1.0));
    Ok(SmallNormThreshold { beta, a_threshold })
}
