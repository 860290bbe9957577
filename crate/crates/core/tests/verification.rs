use std::f64::consts::PI;
use std::sync::Arc;

use fraccx_core::extension::CylinderGrid;
use fraccx_core::semilinear::{minimal_solution, ProblemParams};
use fraccx_core::special::{supercritical_nonexistence, trace_constant};
use fraccx_core::spectral::{build_basis, DomainSpec, SpectralField};
use fraccx_core::verification::{
    extremal_scan, pohozaev_defect, rayleigh_quotient_compact, supercritical_experiment,
    trace_rayleigh, trace_rayleigh_perturbed, ExponentChoice,
};
use fraccx_core::FracParams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn centred(lambda: f64, p_exp: f64) -> ProblemParams {
    ProblemParams {
        lambda,
        q_exp: 0.5,
        p_exp,
        frac: FracParams::new(0.5, 1).unwrap(),
        domain: DomainSpec::interval(1.0).centered(),
        allow_supercritical: true,
    }
}

fn grid_for(pp: &ProblemParams, m: usize) -> Arc<CylinderGrid> {
    Arc::new(CylinderGrid::new(&pp.domain, 2 * m - 1, 2 * m, pp.frac.alpha, None).unwrap())
}

#[test]
fn pohozaev_of_zero_is_zero() {
    let pp = centred(0.5, 2.0);
    let b = build_basis(pp.domain.clone(), 16).unwrap();
    let t = pohozaev_defect(&SpectralField::zeros(&b), &pp, &grid_for(&pp, 16)).unwrap();
    assert_eq!(t.defect, 0.0);
}

#[test]
fn pohozaev_defect_shrinks_for_solutions_only() {
    let pp = centred(0.5, 2.0);
    let mut defects = Vec::new();
    for m in [32, 64, 128] {
        let b = build_basis(pp.domain.clone(), m).unwrap();
        let r = minimal_solution(&pp, &b, 1e-11, 1e3).unwrap();
        defects.push(pohozaev_defect(&r.solution, &pp, &grid_for(&pp, m)).unwrap());
    }
    let d: Vec<f64> = defects.iter().map(|t| t.defect.abs()).collect();
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
    assert!((d[1] / d[2]).log2() >= 1.0, "{d:?}");

    let b = build_basis(pp.domain.clone(), 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coeffs: Vec<f64> = (0..32)
        .map(|j| rng.random_range(0.0..1.0) / (1.0 + j as f64))
        .collect();
    let u = SpectralField::from_coeffs(&b, coeffs).unwrap();
    let t = pohozaev_defect(&u, &pp, &grid_for(&pp, 32)).unwrap();
    let scale = t.boundary.abs() + t.integral_big_f.abs() + t.integral_u_f.abs();
    assert!(t.defect.abs() > 0.05 * scale, "{t:?}");
}

#[test]
fn pohozaev_needs_a_centred_domain() {
    let pp = ProblemParams {
        domain: DomainSpec::interval(1.0),
        ..centred(0.5, 2.0)
    };
    let b = build_basis(pp.domain.clone(), 16).unwrap();
    assert!(pohozaev_defect(&SpectralField::zeros(&b), &pp, &grid_for(&pp, 16)).is_err());
}

#[test]
fn supercritical_runs_all_fail() {
    let pp = centred(0.0, 3.5);
    assert!(supercritical_nonexistence(3.5, pp.frac));
    let r = supercritical_experiment(&pp, 128, 1e3).unwrap();
    assert!(r.predicate_supercritical);
    assert_eq!(r.attempts.len(), 5);
    assert!(!r.any_success);
}

#[test]
fn subcritical_contrast_finds_a_solution() {
    let pp = centred(0.0, 2.9);
    assert!(!supercritical_nonexistence(2.9, pp.frac));
    let r = supercritical_experiment(&pp, 256, 1e3).unwrap();
    assert!(!r.predicate_supercritical);
    assert!(r.any_success);
    assert!(supercritical_nonexistence(3.0, pp.frac));
}

#[test]
fn trace_quotient_is_scale_invariant() {
    for alpha in [0.3, 0.6] {
        for choice in [ExponentChoice::NMinusAlpha, ExponentChoice::NPlusAlpha] {
            let a = trace_rayleigh(alpha, 1, 1.0, choice).unwrap();
            let b = trace_rayleigh(alpha, 1, 2.0, choice).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{alpha} {choice:?}: {a} {b}");
        }
    }
}

#[test]
fn scan_finds_the_extremal_exponent() {
    for alpha in [0.3, 0.5, 0.8] {
        let s = extremal_scan(alpha, 1).unwrap();
        let best = s.entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
        assert!((0.99..=1.01).contains(&best), "{alpha}: {best}");
        assert!(s.best_label.starts_with("NMinusAlpha"));
        assert!(s.entries.iter().all(|e| e.ratio <= 1.01));
        let gauss = s.entries.iter().find(|e| e.label == "gaussian").unwrap();
        assert!(gauss.ratio < 1.0);
    }
}

#[test]
fn perturbation_lowers_the_quotient() {
    let base = trace_rayleigh(0.3, 1, 1.0, ExponentChoice::NMinusAlpha).unwrap();
    let pert = trace_rayleigh_perturbed(0.3, 1.0, ExponentChoice::NMinusAlpha, 0.3).unwrap();
    assert!(pert < base);
    assert!(trace_rayleigh_perturbed(0.6, 1.0, ExponentChoice::NMinusAlpha, 0.3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn compact_bumps_stay_below_the_sharp_constant(
        alpha in 0.2f64..0.8,
        radius in 0.5f64..3.0,
        k in 1i32..4,
        shift in -0.3f64..0.3,
    ) {
        let s = trace_constant(FracParams::new(alpha, 1).unwrap()).unwrap();
        let bump = |x: f64| {
            let t = x / radius;
            if t.abs() < 1.0 { (0.5 * PI * t).cos().powi(2 * k) * (1.0 + shift * t) } else { 0.0 }
        };
        let q = rayleigh_quotient_compact(alpha, radius, bump).unwrap();
        prop_assert!(q > 0.0 && q <= s * 1.01, "q = {q}, S = {s}");
    }
}
