use super::{norm, Discrete, MethodTag, Outcome, ProblemParams, SolveReport};
use crate::error::Result;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor tried by the backtracking line search.
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            min_step: 1.0 / 1024.0,
        }
    }
}

pub(crate) struct NewtonResult {
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton on `D a − P f(u(a)) = 0`.
///
/// Every accepted step strictly lowers the residual norm; the iteration
/// stops unconverged when the line search cannot.
pub(crate) fn newton_core(d: &Discrete, start: &[f64], opts: NewtonOptions) -> NewtonResult {
    let mut a = start.to_vec();
    let mut r = d.residual(&a);
    let mut rn = norm(&r);
    let mut it = 0;
    while rn > opts.tol && it < opts.max_iter {
        it += 1;
        let jac = d.jacobian_from_values(&d.values(&a));
        let rhs = nalgebra::DVector::from_vec(r.clone());
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t >= opts.min_step {
            let trial: Vec<f64> = a.iter().zip(step.iter()).map(|(x, s)| x - t * s).collect();
            let rt = d.residual(&trial);
            let rtn = norm(&rt);
            if rtn.is_finite() && rtn <= (1.0 - 1e-4 * t) * rn {
                a = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonResult {
        coeffs: a,
        residual: rn,
        iterations: it,
        converged: rn <= opts.tol,
    }
}

/// Newton solve of the full problem from an arbitrary start.
pub fn newton_solve(
    start: &SpectralField,
    pp: &ProblemParams,
    opts: NewtonOptions,
) -> Result<SolveReport> {
    let d = Discrete::new(pp, &start.basis)?;
    let res = newton_core(&d, &start.coeffs, opts);
    let sol = d.field(res.coeffs);
    let collapsed = sol.l2_norm() < 1e-10;
    Ok(SolveReport {
        solution: sol,
        residual_norm: res.residual,
        iterations: res.iterations,
        converged: res.converged && !collapsed,
        method_tag: MethodTag::Newton,
        outcome: if collapsed {
            Outcome::Collapsed
        } else if res.converged {
            Outcome::Converged
        } else {
            Outcome::Stalled
        },
    })
}
