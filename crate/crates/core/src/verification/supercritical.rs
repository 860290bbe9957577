use std::sync::Arc;

use serde::Serialize;

use super::pohozaev_defect;
use crate::extension::CylinderGrid;

use crate::error::{FracError, Result};
use crate::semilinear::{
    newton_solve, Discrete, NewtonOptions, Outcome, ProblemParams, SolveReport,
};
use crate::special::supercritical_nonexistence;
use crate::spectral::{build_basis, synthesize, SpectralField};

/// Seeds are `s · t* φ₁` for these `s`.
pub const SEED_SCALES: [f64; 5] = [0.6, 0.8, 1.0, 1.25, 1.6];

#[derive(Debug, Clone, Serialize)]
pub struct SeedAttempt {
    pub seed_scale: f64,
    pub outcome: Outcome,
    /// Converged to a nonnegative solution below the cap that satisfies the
    /// Pohozaev identity.
    pub success: bool,
    pub sup_norm: f64,
    pub min_value: f64,
    pub residual_norm: f64,
    pub tail_fraction: f64,
    /// Pohozaev defect divided by `N ∫F(u)`; NaN when nothing converged.
    pub pohozaev_relative: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupercriticalReport {
    pub p_exp: f64,
    pub critical_exponent: f64,
    pub predicate_supercritical: bool,
    pub modes: usize,
    pub attempts: Vec<SeedAttempt>,
    pub any_success: bool,
}

/// Largest admissible relative Pohozaev defect of an accepted solution.
pub const POHOZAEV_LIMIT: f64 = 0.05;

/// Solves of the pure power problem from several multiples of `φ₁`.
///
/// `t* = (λ₁^{α/2} / ∫φ₁^{p+1})^{1/(p−1)}` is where `J(tφ₁)` peaks. Each seed
/// goes through a normalised fixed point and then damped Newton. An attempt
/// succeeds when the result is a nonnegative solution below `sup_cap` whose
/// Pohozaev defect, on the interval centred at the origin, stays below
/// [`POHOZAEV_LIMIT`] relative to `N ∫F(u)`.
pub fn supercritical_experiment(
    pp: &ProblemParams,
    modes: usize,
    sup_cap: f64,
) -> Result<SupercriticalReport> {
    if !pp.allow_supercritical {
        return Err(FracError::Config(
            "supercritical runs need allow_supercritical".into(),
        ));
    }
    pp.validate()?;
    if pp.domain.dim() != 1 {
        return Err(FracError::Domain(
            "supercritical runs use an interval".into(),
        ));
    }
    let pp = &ProblemParams {
        domain: pp.domain.centered(),
        ..pp.clone()
    };
    let grid = Arc::new(CylinderGrid::new(
        &pp.domain,
        2 * modes - 1,
        2 * modes,
        pp.frac.alpha,
        None,
    )?);
    let basis = build_basis(pp.domain.clone(), modes)?;
    let phi1 = SpectralField::mode(&basis, 0, 1.0);
    let g = synthesize(&phi1);
    let w = g.tensor_weights();
    let moment: f64 = g
        .values
        .iter()
        .zip(&w)
        .map(|(v, w)| w * v.max(0.0).powf(pp.p_exp + 1.0))
        .sum();
    let d1 = basis.first_eigenvalue().powf(0.5 * pp.frac.alpha);
    let t_star = (d1 / moment).powf(1.0 / (pp.p_exp - 1.0));
    let opts = NewtonOptions {
        max_iter: 100,
        ..NewtonOptions::default()
    };
    let mut attempts = Vec::with_capacity(SEED_SCALES.len());
    for &s in &SEED_SCALES {
        let seed = phi1.scaled(s * t_star);
        let (stage, peto) = petviashvili(pp, &seed, sup_cap)?;
        let r = newton_solve(&stage, pp, opts)?;
        let r = SolveReport {
            outcome: if peto == Outcome::Converged {
                r.outcome
            } else {
                peto
            },
            ..r
        };
        let vals = synthesize(&r.solution);
        let sup = vals.max_abs();
        let min = vals.min();
        let tail = r.solution.tail_fraction(pp.frac);
        let solved = r.converged
            && peto == Outcome::Converged
            && r.outcome == Outcome::Converged
            && sup <= sup_cap;
        let pohozaev_relative = if solved {
            let t = pohozaev_defect(&r.solution, pp, &grid)?;
            t.defect / (pp.frac.n_dim as f64 * t.integral_big_f)
        } else {
            f64::NAN
        };
        let success = solved && min >= -1e-2 * sup && pohozaev_relative.abs() <= POHOZAEV_LIMIT;
        attempts.push(SeedAttempt {
            seed_scale: s,
            outcome: r.outcome,
            success,
            sup_norm: sup,
            min_value: min,
            residual_norm: r.residual_norm,
            tail_fraction: tail,
            pohozaev_relative,
            iterations: r.iterations,
        });
    }
    Ok(SupercriticalReport {
        p_exp: pp.p_exp,
        critical_exponent: pp.frac.critical_exponent(),
        predicate_supercritical: supercritical_nonexistence(pp.p_exp, pp.frac),
        modes,
        any_success: attempts.iter().any(|a| a.success),
        attempts,
    })
}

/// Normalised fixed point `a ← M^{p/(p−1)} D^{-1} P(u^p)`, `M = ⟨Da,a⟩/⟨P(u^p),a⟩`.
fn petviashvili(
    pp: &ProblemParams,
    seed: &SpectralField,
    sup_cap: f64,
) -> Result<(SpectralField, Outcome)> {
    let d = Discrete::new(pp, &seed.basis)?;
    let gamma = pp.p_exp / (pp.p_exp - 1.0);
    let mut a = seed.coeffs.clone();
    for _ in 0..PETVIASHVILI_SWEEPS {
        let u = d.values(&a);
        let f = d.forcing(&u);
        let quad: f64 = a.iter().zip(&d.diag).map(|(a, dj)| dj * a * a).sum();
        let pair: f64 = f.iter().zip(&a).map(|(f, a)| f * a).sum();
        if !(pair > 0.0) || quad < 1e-300 {
            return Ok((d.field(a), Outcome::Collapsed));
        }
        let m = (quad / pair).powf(gamma);
        let next: Vec<f64> = f.iter().zip(&d.diag).map(|(f, dj)| m * f / dj).collect();
        let step: f64 = next
            .iter()
            .zip(&a)
            .map(|(n, a)| (n - a).powi(2))
            .sum::<f64>()
            .sqrt();
        let size: f64 = next.iter().map(|n| n * n).sum::<f64>().sqrt();
        a = next;
        let sup = d.values(&a).iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if !sup.is_finite() || sup > sup_cap {
            return Ok((d.field(a), Outcome::Diverged));
        }
        if size < 1e-12 {
            return Ok((d.field(a), Outcome::Collapsed));
        }
        if step <= 1e-9 * size {
            return Ok((d.field(a), Outcome::Converged));
        }
    }
    Ok((d.field(a), Outcome::Stalled))
}

const PETVIASHVILI_SWEEPS: usize = 2000;
