//! Numerical verdicts on the continuous theory: the Pohozaev identity,
//! nonexistence for supercritical powers, and the sharp trace inequality.

mod pohozaev;
mod supercritical;
mod trace;

use crate::error::Result;
use crate::special::FracParams;
use crate::spectral::DomainSpec;

pub use pohozaev::{pohozaev_defect, PohozaevTerms};
pub use supercritical::{
    supercritical_experiment, SeedAttempt, SupercriticalReport, POHOZAEV_LIMIT, SEED_SCALES,
};
pub use trace::{
    extremal_scan, rayleigh_quotient_compact, trace_rayleigh, trace_rayleigh_perturbed,
    ExponentChoice, ExtremalScan, ScanEntry,
};

/// `λ₁^{α/2}` of the spectral operator on `domain`.
pub fn first_eigenvalue(domain: &DomainSpec, p: FracParams) -> Result<f64> {
    domain.validate()?;
    p.validate()?;
    let lambda1: f64 = domain
        .lengths
        .iter()
        .map(|l| (std::f64::consts::PI / l).powi(2))
        .sum();
    Ok(lambda1.powf(0.5 * p.alpha))
}
