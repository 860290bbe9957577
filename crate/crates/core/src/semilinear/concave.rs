use std::sync::Arc;

use super::newton::{newton_core, NewtonOptions};
use super::{norm, Discrete, MethodTag, Outcome, ProblemParams, SolveReport};
use crate::error::{FracError, Result};
use crate::spectral::Eigenbasis;

const MAX_SWEEPS: usize = 5000;

/// Positive solution of `(−Δ)^{α/2} v = λ v^q` by the fixed point
/// `v ← solve_linear(λ v^q)` started from `v ≡ 1`.
///
/// The contraction factor near the solution is `q`. If the sweep budget runs
/// out, damped Newton finishes from the last iterate.
pub fn solve_concave(
    lambda: f64,
    pp: &ProblemParams,
    basis: &Arc<Eigenbasis>,
    tol: f64,
) -> Result<SolveReport> {
    let pl = pp.with_lambda(lambda);
    if !(lambda > 0.0) {
        return Err(FracError::Domain(format!(
            "concave problem needs lambda > 0, got {lambda}"
        )));
    }
    let d = Discrete::new(&pl, basis)?.concave_only();
    let n = basis.grid_size() + 2;
    let mut v: Vec<f64> = (0..d.weights().len())
        .map(|idx| {
            let on_edge = |i: usize| i == 0 || i + 1 == n;
            let edge = if basis.dim() == 1 {
                on_edge(idx)
            } else {
                on_edge(idx / n) || on_edge(idx % n)
            };
            if edge {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    let mut a: Option<Vec<f64>> = None;
    for sweep in 0..MAX_SWEEPS {
        let f = d.forcing(&v);
        let next: Vec<f64> = f.iter().zip(&d.diag).map(|(f, dj)| f / dj).collect();
        if let Some(prev) = &a {
            let r: Vec<f64> = prev
                .iter()
                .zip(&next)
                .zip(&d.diag)
                .map(|((p, n), dj)| dj * (p - n))
                .collect();
            let rn = norm(&r);
            if rn <= tol {
                return Ok(report(&d, prev.clone(), rn, sweep, MethodTag::Monotone));
            }
        }
        v = d.values(&next);
        a = Some(next);
    }
    let start = a.expect("at least one sweep");
    let res = newton_core(
        &d,
        &start,
        NewtonOptions {
            tol,
            ..NewtonOptions::default()
        },
    );
    if res.converged {
        return Ok(report(
            &d,
            res.coeffs,
            res.residual,
            MAX_SWEEPS + res.iterations,
            MethodTag::Newton,
        ));
    }
    Err(FracError::IterationFailure {
        method: "concave fixed point",
        iterations: MAX_SWEEPS + res.iterations,
        residual: res.residual,
    })
}

fn report(d: &Discrete, a: Vec<f64>, rn: f64, iterations: usize, tag: MethodTag) -> SolveReport {
    SolveReport {
        solution: d.field(a),
        residual_norm: rn,
        iterations,
        converged: true,
        method_tag: tag,
        outcome: Outcome::Converged,
    }
}

/// Newton solve of the concave problem from `start`; used as a cross-check.
pub fn concave_newton(
    lambda: f64,
    pp: &ProblemParams,
    start: &crate::spectral::SpectralField,
    tol: f64,
) -> Result<SolveReport> {
    let pl = pp.with_lambda(lambda);
    let d = Discrete::new(&pl, &start.basis)?.concave_only();
    let res = newton_core(
        &d,
        &start.coeffs,
        NewtonOptions {
            tol,
            ..NewtonOptions::default()
        },
    );
    Ok(SolveReport {
        converged: res.converged,
        outcome: if res.converged {
            Outcome::Converged
        } else {
            Outcome::Stalled
        },
        solution: d.field(res.coeffs),
        residual_norm: res.residual,
        iterations: res.iterations,
        method_tag: MethodTag::Newton,
    })
}
