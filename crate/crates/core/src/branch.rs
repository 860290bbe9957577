//! Continuation of the minimal branch in λ and bracketing of the critical
//! parameter Λ.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::parallel::{map_ordered, Execution};
use crate::semilinear::{
    energy, lambda_upper_bound, linearized_eigen, minimal_solution_from, solve_concave,
    MonotoneOptions, Outcome, ProblemParams, SolveReport,
};
use crate::spectral::{Eigenbasis, SpectralField};

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub coeffs: SpectralField,
    pub sup_norm: f64,
    pub energy_value: f64,
    /// Principal eigenvalue of the linearisation; NaN at failed points.
    pub mu1: f64,
    pub converged: bool,
    pub outcome: Outcome,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct BranchResult {
    pub params: ProblemParams,
    pub points: Vec<BranchPoint>,
    /// Last converged λ and first failed λ of the grid, when both exist.
    pub lambda_star_bracket: Option<(f64, f64)>,
    pub resolution_tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartMode {
    /// Each λ starts from the previous minimal solution; sequential.
    #[default]
    Warm,
    /// Each λ starts from its concave solution; independent solves.
    Cold,
}

#[derive(Debug, Clone, Copy)]
pub struct BranchOptions {
    pub monotone: MonotoneOptions,
    pub mode: StartMode,
    pub execution: Execution,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            monotone: MonotoneOptions::default(),
            mode: StartMode::Warm,
            execution: Execution::default(),
        }
    }
}

fn annotate(lambda: f64, e: FracError) -> FracError {
    match e {
        FracError::Domain(m) => FracError::Domain(format!("at lambda = {lambda}: {m}")),
        FracError::Inconsistent(m) => FracError::Inconsistent(format!("at lambda = {lambda}: {m}")),
        FracError::LinearAlgebra(m) => {
            FracError::LinearAlgebra(format!("at lambda = {lambda}: {m}"))
        }
        other => other,
    }
}

fn point(pp: &ProblemParams, r: SolveReport) -> Result<BranchPoint> {
    let mu1 = if r.converged {
        linearized_eigen(&r.solution, pp, 1)?[0]
    } else {
        f64::NAN
    };
    Ok(BranchPoint {
        lambda: pp.lambda,
        sup_norm: r.sup_norm(),
        energy_value: energy(&r.solution, pp),
        mu1,
        converged: r.converged,
        outcome: r.outcome,
        residual_norm: r.residual_norm,
        iterations: r.iterations,
        coeffs: r.solution,
    })
}

fn cold_solve(
    pp: &ProblemParams,
    basis: &Arc<Eigenbasis>,
    opts: MonotoneOptions,
) -> Result<SolveReport> {
    let start = solve_concave(pp.lambda, pp, basis, 0.1 * opts.tol)?;
    minimal_solution_from(pp, &start.solution, opts)
}

/// Minimal solutions along an increasing λ grid.
pub fn trace_branch(
    pp_template: &ProblemParams,
    basis: &Arc<Eigenbasis>,
    lambda_grid: &[f64],
    opts: BranchOptions,
) -> Result<BranchResult> {
    if lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FracError::Config(
            "lambda grid must be strictly increasing".into(),
        ));
    }
    let points = match opts.mode {
        StartMode::Cold => map_ordered(opts.execution, lambda_grid, |&lam| {
            let pp = pp_template.with_lambda(lam);
            cold_solve(&pp, basis, opts.monotone)
                .and_then(|r| point(&pp, r))
                .map_err(|e| annotate(lam, e))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?,
        StartMode::Warm => {
            let mut out: Vec<BranchPoint> = Vec::with_capacity(lambda_grid.len());
            for &lam in lambda_grid {
                let pp = pp_template.with_lambda(lam);
                let prev = out.last().filter(|p| p.converged).map(|p| &p.coeffs);
                let r = match prev {
                    Some(w) => minimal_solution_from(&pp, w, opts.monotone),
                    None => cold_solve(&pp, basis, opts.monotone),
                };
                out.push(
                    r.and_then(|r| point(&pp, r))
                        .map_err(|e| annotate(lam, e))?,
                );
            }
            out
        }
    };
    let lo = points
        .iter()
        .take_while(|p| p.converged)
        .last()
        .map(|p| p.lambda);
    let hi = points.iter().find(|p| !p.converged).map(|p| p.lambda);
    Ok(BranchResult {
        params: pp_template.clone(),
        points,
        lambda_star_bracket: lo.zip(hi),
        resolution_tag: format!("{:?}x{}", basis.domain.kind, basis.mode_count).to_lowercase(),
    })
}

/// Bracket `(lo, hi)` with `hi − lo ≤ tol_lambda`: the minimal solution
/// exists at `lo` and the monotone iteration fails at `hi`.
///
/// The initial bracket comes from doubling λ from `tol_lambda`, capped at
/// [`lambda_upper_bound`]; each step warm-starts from the solution at the
/// current `lo`.
pub fn estimate_lambda_star(
    pp_template: &ProblemParams,
    basis: &Arc<Eigenbasis>,
    tol_lambda: f64,
    opts: MonotoneOptions,
) -> Result<(f64, f64)> {
    if !(tol_lambda > 0.0) {
        return Err(FracError::Config("tol_lambda must be positive".into()));
    }
    let cap = lambda_upper_bound(pp_template, basis);
    let solve_from = |lam: f64, start: Option<&SpectralField>| -> Result<SolveReport> {
        let pp = pp_template.with_lambda(lam);
        let r = match start {
            Some(w) => minimal_solution_from(&pp, w, opts),
            None => cold_solve(&pp, basis, opts),
        };
        r.map_err(|e| annotate(lam, e))
    };
    let mut lam = tol_lambda;
    let first = solve_from(lam, None)?;
    if !first.converged {
        return Ok((0.0, lam));
    }
    let mut lo = (lam, first.solution);
    let mut hi = loop {
        if lam >= cap {
            return Err(FracError::Inconsistent(format!(
                "monotone iteration converged at the nonexistence bound lambda = {cap}"
            )));
        }
        lam = (2.0 * lam).min(cap);
        let r = solve_from(lam, Some(&lo.1))?;
        if r.converged {
            lo = (lam, r.solution);
        } else {
            break lam;
        }
    };
    while hi - lo.0 > tol_lambda {
        let mid = 0.5 * (lo.0 + hi);
        let r = solve_from(mid, Some(&lo.1))?;
        if r.converged {
            lo = (mid, r.solution);
        } else {
            hi = mid;
        }
    }
    Ok((lo.0, hi))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniformBound {
    pub max_sup_norm: f64,
    pub lambda_at_max: f64,
    /// Whether the a priori bound is known to hold, i.e. `α ≥ 1`.
    pub alpha_at_least_one: bool,
}

/// Largest sup-norm over the converged points of a branch.
pub fn uniform_bound_scan(result: &BranchResult) -> Result<UniformBound> {
    let best = result
        .points
        .iter()
        .filter(|p| p.converged)
        .max_by(|a, b| a.sup_norm.partial_cmp(&b.sup_norm).unwrap())
        .ok_or_else(|| FracError::Config("branch has no converged point".into()))?;
    Ok(UniformBound {
        max_sup_norm: best.sup_norm,
        lambda_at_max: best.lambda,
        alpha_at_least_one: result.params.frac.alpha >= 1.0,
    })
}

/// `lambda,sup_norm,energy,mu1,converged` rows.
pub fn write_branch_csv<W: Write>(out: W, result: &BranchResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "sup_norm", "energy", "mu1", "converged"])?;
    for p in &result.points {
        w.write_record([
            format!("{:e}", p.lambda),
            format!("{:e}", p.sup_norm),
            format!("{:e}", p.energy_value),
            format!("{:e}", p.mu1),
            p.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub lo: f64,
    pub hi: f64,
    pub relative_width: f64,
    pub lambda_upper_bound: f64,
    pub resolution_tag: String,
}

impl BracketReport {
    pub fn new(lo: f64, hi: f64, pp: &ProblemParams, basis: &Eigenbasis) -> Self {
        Self {
            lo,
            hi,
            relative_width: (hi - lo) / hi,
            lambda_upper_bound: lambda_upper_bound(pp, basis),
            resolution_tag: format!("{:?}x{}", basis.domain.kind, basis.mode_count).to_lowercase(),
        }
    }
}
