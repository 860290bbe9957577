use std::sync::Arc;

use super::eigen::is_stable;
use super::newton::{newton_core, NewtonOptions};
use super::{
    interior_min, norm, solve_concave, Discrete, MethodTag, Outcome, ProblemParams, SolveReport,
    POTENTIAL_FLOOR,
};
use crate::error::{FracError, Result};
use crate::spectral::{Eigenbasis, SpectralField};

#[derive(Debug, Clone, Copy)]
pub struct MonotoneOptions {
    pub tol: f64,
    pub sup_cap: f64,
    pub max_sweeps: usize,
    /// Allowed decrease between sweeps, relative to `max(1, sup u)`.
    pub slack: f64,
    /// Newton refinements are accepted only if `μ₁ ≥ −stability_eps`.
    pub stability_eps: f64,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            sup_cap: 1e3,
            max_sweeps: 500,
            slack: 1e-12,
            stability_eps: 1e-6,
        }
    }
}

/// Minimal solution by monotone iteration from the concave subsolution.
pub fn minimal_solution(
    pp: &ProblemParams,
    basis: &Arc<Eigenbasis>,
    tol: f64,
    sup_cap: f64,
) -> Result<SolveReport> {
    let opts = MonotoneOptions {
        tol,
        sup_cap,
        ..MonotoneOptions::default()
    };
    let start = solve_concave(pp.lambda, pp, basis, 0.1 * tol)?;
    minimal_solution_from(pp, &start.solution, opts)
}

/// Monotone iteration `u ← (D + M)^{-1} P(f(u) + M u)` from a subsolution.
///
/// The shift `M = p sup^{p−1} + λq max(sup, δ)^{q−1}` is recomputed every
/// sweep. The start is assumed to solve its own problem to `opts.tol`.
/// Newton refinement is tried after 8, 16, 32, ... sweeps and accepted
/// when it converges to a stable solution lying above the current iterate.
/// Growth past `sup_cap`, or a monotonicity break once `M` exceeds the largest
/// eigenvalue of the basis, is reported as [`Outcome::Diverged`].
pub fn minimal_solution_from(
    pp: &ProblemParams,
    start: &SpectralField,
    opts: MonotoneOptions,
) -> Result<SolveReport> {
    pp.validate()?;
    let d = Discrete::new(pp, &start.basis)?;
    let (q, p, lam) = (pp.q_exp, pp.p_exp, pp.lambda);
    let mut a = start.coeffs.clone();
    let mut u = d.values(&a);
    let mut next_newton = 8;
    let dom = &start.basis.domain;
    let d_max = d.diag.iter().copied().fold(0.0, f64::max);
    let sup_phi = (2f64.powi(dom.dim() as i32) / dom.measure()).sqrt();
    let newton = NewtonOptions {
        tol: opts.tol,
        ..NewtonOptions::default()
    };
    let finish = |a: Vec<f64>, rn: f64, it: usize, outcome: Outcome| SolveReport {
        solution: d.field(a),
        residual_norm: rn,
        iterations: it,
        converged: outcome == Outcome::Converged,
        method_tag: MethodTag::Monotone,
        outcome,
    };
    for sweep in 1..=opts.max_sweeps {
        let sup = u.iter().copied().fold(0.0, f64::max);
        if !sup.is_finite() || sup > opts.sup_cap {
            let rn = d.residual_norm(&a);
            return Ok(finish(a, rn, sweep - 1, Outcome::Diverged));
        }
        let shift = p * sup.powf(p - 1.0) + lam * q * sup.max(POTENTIAL_FLOOR).powf(q - 1.0);
        let g: Vec<f64> = u.iter().map(|&s| d.f(s) + shift * s).collect();
        let pg = d.project(&g);
        let a_new: Vec<f64> = pg
            .iter()
            .zip(&d.diag)
            .map(|(g, dj)| g / (dj + shift))
            .collect();
        let u_new = d.values(&a_new);
        let diff: Vec<f64> = u_new.iter().zip(&u).map(|(n, o)| n - o).collect();
        let violation = -interior_min(&diff, d.basis);
        let mut allowance = opts.slack * sup.max(1.0);
        if sweep == 1 {
            // The start solves its own problem only up to `tol`; bound the
            // resulting pointwise dip by max|φ_j| ‖r‖ ‖(D + M)^{-1}‖.
            let inv: f64 = d
                .diag
                .iter()
                .map(|dj| (dj + shift).powi(-2))
                .sum::<f64>()
                .sqrt();
            allowance += sup_phi * opts.tol * inv;
        }
        if violation > allowance {
            if shift > d_max {
                // The shifted resolvent is no longer resolved by the basis.
                let rn = d.residual_norm(&a);
                return Ok(finish(a, rn, sweep, Outcome::Diverged));
            }
            return Err(FracError::NonMonotone { sweep, violation });
        }
        let step: Vec<f64> = a_new.iter().zip(&a).map(|(n, o)| n - o).collect();
        let step_norm = norm(&step);
        a = a_new;
        u = u_new;
        // Residual of the shifted iteration: (D + M)(a_k − a_{k+1}).
        let rn = step
            .iter()
            .zip(&d.diag)
            .map(|(s, dj)| (s * (dj + shift)).powi(2))
            .sum::<f64>()
            .sqrt();
        if rn <= opts.tol {
            let rn = d.residual_norm(&a);
            if rn <= opts.tol {
                return Ok(finish(a, rn, sweep, Outcome::Converged));
            }
        }
        if sweep == next_newton || step_norm <= 1e-9 * norm(&a).max(1e-300) {
            next_newton *= 2;
            let res = newton_core(&d, &a, newton);
            if res.converged {
                let w = d.values(&res.coeffs);
                let gap: Vec<f64> = w.iter().zip(&u).map(|(w, u)| w - u).collect();
                let above = interior_min(&gap, d.basis) >= -opts.slack.max(1e-10) * sup.max(1.0);
                if above && is_stable(&d, &w, opts.stability_eps) {
                    return Ok(finish(
                        res.coeffs,
                        res.residual,
                        sweep + res.iterations,
                        Outcome::Converged,
                    ));
                }
            }
        }
    }
    let rn = d.residual_norm(&a);
    Ok(finish(a, rn, opts.max_sweeps, Outcome::Stalled))
}
