//! Solvers for `(−Δ)^{α/2} u = λ u^q + u^p` in spectral form.
//!
//! The extension constant is normalised to one throughout, so `λ` is the
//! coefficient of the local (cylinder) problem.

mod concave;
mod eigen;
mod minimal;
mod mountain_pass;
mod newton;
mod smallnorm;

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::special::{kappa, FracParams};
use crate::spectral::field::{analyze_with, synthesize_with};
use crate::spectral::{DomainSpec, Eigenbasis, GridField, SpectralField};

pub use concave::{concave_newton, solve_concave};
pub use eigen::{linearized_eigen, linearized_eigen_with_potential};
pub use minimal::{minimal_solution, minimal_solution_from, MonotoneOptions};
pub use mountain_pass::{second_solution, MountainPassOptions};
pub use newton::{newton_solve, NewtonOptions};
pub use smallnorm::{smallnorm_threshold, SmallNormThreshold, SMALLNORM_SAFETY};

/// Floor used wherever `s^{q−1}` is evaluated near `s = 0`.
pub const POTENTIAL_FLOOR: f64 = 1e-8;
/// Ceiling of the linearised potential `f'_λ(w)`.
pub const POTENTIAL_CEILING: f64 = 1e8;

/// `(λ, q, p)` together with the operator and domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub lambda: f64,
    pub q_exp: f64,
    pub p_exp: f64,
    pub frac: FracParams,
    pub domain: DomainSpec,
    /// Admit `p ≥ (N+α)/(N−α)` and `λ = 0`; meant for nonexistence runs.
    #[serde(default)]
    pub allow_supercritical: bool,
}

impl ProblemParams {
    pub fn new(
        lambda: f64,
        q_exp: f64,
        p_exp: f64,
        frac: FracParams,
        domain: DomainSpec,
    ) -> Result<Self> {
        let pp = Self {
            lambda,
            q_exp,
            p_exp,
            frac,
            domain,
            allow_supercritical: false,
        };
        pp.validate()?;
        Ok(pp)
    }

    pub fn validate(&self) -> Result<()> {
        self.frac.validate()?;
        self.domain.validate()?;
        if self.domain.dim() != self.frac.n_dim {
            return Err(FracError::Domain(format!(
                "dimension {} does not match a {:?} domain",
                self.frac.n_dim, self.domain.kind
            )));
        }
        if !(self.q_exp > 0.0 && self.q_exp < 1.0 && self.p_exp > 1.0) {
            return Err(FracError::Domain(format!(
                "need 0 < q < 1 < p, got q = {} and p = {}",
                self.q_exp, self.p_exp
            )));
        }
        let lambda_ok = if self.allow_supercritical {
            self.lambda >= 0.0
        } else {
            self.lambda > 0.0
        };
        if !lambda_ok || !self.lambda.is_finite() {
            return Err(FracError::Domain(format!("invalid lambda {}", self.lambda)));
        }
        if !self.allow_supercritical && self.p_exp >= self.frac.critical_exponent() {
            return Err(FracError::Domain(format!(
                "p = {} is not below the critical exponent {}",
                self.p_exp,
                self.frac.critical_exponent()
            )));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }
}

/// `f_λ(s) = λ s^q + s^p` for `s > 0`, zero otherwise.
pub fn nonlinearity(s: f64, pp: &ProblemParams) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        pp.lambda * s.powf(pp.q_exp) + s.powf(pp.p_exp)
    }
}

/// `F_λ(s) = λ s^{q+1}/(q+1) + s^{p+1}/(p+1)` for `s > 0`, zero otherwise.
pub fn primitive(s: f64, pp: &ProblemParams) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        pp.lambda * s.powf(pp.q_exp + 1.0) / (pp.q_exp + 1.0)
            + s.powf(pp.p_exp + 1.0) / (pp.p_exp + 1.0)
    }
}

/// Clipped derivative `f'_λ(s)` used by Newton and the eigenproblem.
pub fn derivative(s: f64, pp: &ProblemParams) -> f64 {
    let concave =
        (pp.lambda * pp.q_exp * s.max(POTENTIAL_FLOOR).powf(pp.q_exp - 1.0)).min(POTENTIAL_CEILING);
    let convex = if s > 0.0 {
        pp.p_exp * s.powf(pp.p_exp - 1.0)
    } else {
        0.0
    };
    (concave + convex).min(POTENTIAL_CEILING)
}

/// λ of the nonlocal problem corresponding to a local-problem `λ`, obtained by
/// multiplying with `κ_α^{p(q−1)−1}`. Exposed as stated, without a derivation.
pub fn nonlocal_lambda(lambda_local: f64, pp: &ProblemParams) -> Result<f64> {
    let k = kappa(pp.frac.alpha)?;
    Ok(lambda_local * k.powf(pp.p_exp * (pp.q_exp - 1.0) - 1.0))
}

/// λ above which no nonnegative discrete solution exists.
///
/// Testing the equation with `φ₁ > 0` gives `min_t (λ t^{q−1} + t^{p−1}) <
/// λ₁^{α/2}`; the minimum is explicit and increasing in λ.
pub fn lambda_upper_bound(pp: &ProblemParams, basis: &Eigenbasis) -> f64 {
    let (q, p) = (pp.q_exp, pp.p_exp);
    let d1 = basis.first_eigenvalue().powf(0.5 * pp.frac.alpha);
    // min_t (λ t^{q−1} + t^{p−1}) = C λ^{(p−1)/(p−q)}
    let gmin = |lam: f64| {
        let t = (lam * (1.0 - q) / (p - 1.0)).powf(1.0 / (p - q));
        lam * t.powf(q - 1.0) + t.powf(p - 1.0)
    };
    let c = gmin(1.0);
    (d1 / c).powf((p - q) / (p - 1.0))
}

/// Solver that produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Monotone,
    Newton,
    MountainPass,
}

/// Termination reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    /// The sup-norm passed the divergence cap: the numerical nonexistence signal.
    Diverged,
    /// Iteration budget exhausted without either verdict.
    Stalled,
    /// The iterate collapsed to zero.
    Collapsed,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: SpectralField,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method_tag: MethodTag,
    pub outcome: Outcome,
}

/// Serializable summary of a [`SolveReport`].
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub params: ProblemParams,
    pub modes: usize,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: MethodTag,
    pub outcome: Outcome,
    pub sup_norm: f64,
    pub energy: f64,
    pub mu1: Option<f64>,
}

impl SolveReport {
    pub fn sup_norm(&self) -> f64 {
        let b = &self.solution.basis;
        synthesize_with(b.default_tables(), b, &self.solution.coeffs)
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn summary(&self, pp: &ProblemParams) -> Result<SolveSummary> {
        let mu1 = if self.converged {
            Some(linearized_eigen(&self.solution, pp, 1)?[0])
        } else {
            None
        };
        Ok(SolveSummary {
            params: pp.clone(),
            modes: self.solution.basis.mode_count,
            residual_norm: self.residual_norm,
            iterations: self.iterations,
            converged: self.converged,
            method: self.method_tag,
            outcome: self.outcome,
            sup_norm: self.sup_norm(),
            energy: energy(&self.solution, pp),
            mu1,
        })
    }
}

/// Discretised problem on a fixed basis: diagonal operator plus collocation
/// evaluation of the nonlinearity on the default grid.
pub(crate) struct Discrete<'a> {
    pub pp: &'a ProblemParams,
    pub basis: &'a Arc<Eigenbasis>,
    pub diag: Vec<f64>,
    weights: Vec<f64>,
    /// Drop the `u^p` term (the pure concave auxiliary problem).
    concave_only: bool,
}

impl<'a> Discrete<'a> {
    pub fn new(pp: &'a ProblemParams, basis: &'a Arc<Eigenbasis>) -> Result<Self> {
        if basis.domain.kind != pp.domain.kind || basis.domain.lengths != pp.domain.lengths {
            return Err(FracError::ShapeMismatch {
                expected: format!("{:?}", pp.domain),
                found: format!("{:?}", basis.domain),
            });
        }
        let diag = basis
            .eigenvalues
            .iter()
            .map(|ev| ev.powf(0.5 * pp.frac.alpha))
            .collect();
        let g = GridField::zeros(&basis.domain, basis.grid_size());
        Ok(Self {
            pp,
            basis,
            diag,
            weights: g.tensor_weights(),
            concave_only: false,
        })
    }

    pub fn concave_only(mut self) -> Self {
        self.concave_only = true;
        self
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        if self.concave_only {
            if s <= 0.0 {
                0.0
            } else {
                self.pp.lambda * s.powf(self.pp.q_exp)
            }
        } else {
            nonlinearity(s, self.pp)
        }
    }

    #[inline]
    pub fn big_f(&self, s: f64) -> f64 {
        if self.concave_only {
            if s <= 0.0 {
                0.0
            } else {
                self.pp.lambda * s.powf(self.pp.q_exp + 1.0) / (self.pp.q_exp + 1.0)
            }
        } else {
            primitive(s, self.pp)
        }
    }

    #[inline]
    pub fn fprime(&self, s: f64) -> f64 {
        if self.concave_only {
            (self.pp.lambda * self.pp.q_exp * s.max(POTENTIAL_FLOOR).powf(self.pp.q_exp - 1.0))
                .min(POTENTIAL_CEILING)
        } else {
            derivative(s, self.pp)
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self, a: &[f64]) -> Vec<f64> {
        synthesize_with(self.basis.default_tables(), self.basis, a)
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        analyze_with(self.basis.default_tables(), self.basis, v)
    }

    pub fn field(&self, a: Vec<f64>) -> SpectralField {
        SpectralField {
            basis: Arc::clone(self.basis),
            coeffs: a,
        }
    }

    /// `P f(u)` from grid values of `u`.
    pub fn forcing(&self, u: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = u.iter().map(|&s| self.f(s)).collect();
        self.project(&f)
    }

    pub fn residual(&self, a: &[f64]) -> Vec<f64> {
        let f = self.forcing(&self.values(a));
        a.iter()
            .zip(&self.diag)
            .zip(&f)
            .map(|((a, d), f)| d * a - f)
            .collect()
    }

    pub fn residual_norm(&self, a: &[f64]) -> f64 {
        norm(&self.residual(a))
    }

    pub fn energy(&self, a: &[f64]) -> f64 {
        let quad: f64 = a.iter().zip(&self.diag).map(|(a, d)| d * a * a).sum();
        let u = self.values(a);
        let big_f: f64 = u
            .iter()
            .zip(&self.weights)
            .map(|(&s, w)| w * self.big_f(s))
            .sum();
        0.5 * quad - big_f
    }

    /// Galerkin matrix of multiplication by the grid function `v`.
    pub fn potential_matrix(&self, v: &[f64]) -> DMatrix<f64> {
        let tables = self.basis.default_tables();
        let b = self.basis;
        if tables.len() == 1 {
            let s = &tables[0].sines;
            let mut scaled = s.clone();
            for (i, mut row) in scaled.row_iter_mut().enumerate() {
                row *= v[i] * self.weights[i];
            }
            let q = s.tr_mul(&scaled);
            let m = b.mode_count;
            DMatrix::from_fn(b.len(), b.len(), |r, c| {
                let (jr, jc) = (b.modes[r][0] - 1, b.modes[c][0] - 1);
                debug_assert!(jr < m && jc < m);
                q[(jr, jc)]
            })
        } else {
            let (s0, s1) = (&tables[0].sines, &tables[1].sines);
            let (r0, r1) = (s0.nrows(), s1.nrows());
            let m = b.mode_count;
            // T_l(j, j') = Σ_i w_il v_il S0(i,j) S0(i,j')
            let mut t = Vec::with_capacity(r1);
            for l in 0..r1 {
                let mut scaled = s0.clone();
                for i in 0..r0 {
                    let idx = i * r1 + l;
                    let c = v[idx] * self.weights[idx];
                    for j in 0..m {
                        scaled[(i, j)] *= c;
                    }
                }
                t.push(s0.tr_mul(&scaled));
            }
            let mut out = DMatrix::zeros(b.len(), b.len());
            let mut col = DMatrix::zeros(r1, m);
            for j in 0..m {
                for jp in j..m {
                    for l in 0..r1 {
                        let c = t[l][(j, jp)];
                        for k in 0..m {
                            col[(l, k)] = c * s1[(l, k)];
                        }
                    }
                    let blk = s1.tr_mul(&col);
                    for k in 0..m {
                        for kp in 0..m {
                            let r = b.position(j + 1, k + 1);
                            let c = b.position(jp + 1, kp + 1);
                            out[(r, c)] = blk[(k, kp)];
                            out[(c, r)] = blk[(k, kp)];
                        }
                    }
                }
            }
            out
        }
    }

    /// `diag(λ_j^{α/2}) − P diag(f'(u))`.
    pub fn jacobian_from_values(&self, u: &[f64]) -> DMatrix<f64> {
        let fp: Vec<f64> = u.iter().map(|&s| self.fprime(s)).collect();
        let mut j = -self.potential_matrix(&fp);
        for (i, d) in self.diag.iter().enumerate() {
            j[(i, i)] += d;
        }
        j
    }
}

/// Smallest value at interior grid nodes.
pub(crate) fn interior_min(u: &[f64], basis: &Eigenbasis) -> f64 {
    let n = basis.grid_size() + 2;
    let inner = |i: usize| i > 0 && i + 1 < n;
    u.iter()
        .enumerate()
        .filter(|(idx, _)| {
            if basis.dim() == 1 {
                inner(*idx)
            } else {
                inner(idx / n) && inner(idx % n)
            }
        })
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `J_λ(u) = ½ ‖u‖²_{H} − ∫ F_λ(u)`.
pub fn energy(u: &SpectralField, pp: &ProblemParams) -> f64 {
    match Discrete::new(pp, &u.basis) {
        Ok(d) => d.energy(&u.coeffs),
        Err(_) => f64::NAN,
    }
}

/// `‖(−Δ)^{α/2} u − P f_λ(u)‖_{L²}`.
pub fn residual_norm(u: &SpectralField, pp: &ProblemParams) -> Result<f64> {
    Ok(Discrete::new(pp, &u.basis)?.residual_norm(&u.coeffs))
}

/// Residual `(−Δ)^{α/2} u − P f_λ(u)` as a field.
pub fn residual(u: &SpectralField, pp: &ProblemParams) -> Result<SpectralField> {
    let d = Discrete::new(pp, &u.basis)?;
    Ok(d.field(d.residual(&u.coeffs)))
}
