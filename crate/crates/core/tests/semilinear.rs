use std::sync::Arc;

use fraccx_core::extension::{extend_fd, neumann_trace, relative_l2, CylinderGrid};
use fraccx_core::semilinear::{
    concave_newton, energy, linearized_eigen, linearized_eigen_with_potential, minimal_solution,
    minimal_solution_from, newton_solve, nonlinearity, primitive, second_solution,
    smallnorm_threshold, solve_concave, MonotoneOptions, MountainPassOptions, NewtonOptions,
    Outcome, ProblemParams,
};
use fraccx_core::spectral::{
    build_basis, synthesize, synthesize_on, DomainSpec, Eigenbasis, SpectralField,
};
use fraccx_core::FracParams;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn reference(lambda: f64) -> (ProblemParams, Arc<Eigenbasis>) {
    let pp = ProblemParams::new(
        lambda,
        0.5,
        2.0,
        FracParams::new(0.5, 1).unwrap(),
        DomainSpec::interval(1.0),
    )
    .unwrap();
    let b = build_basis(pp.domain.clone(), 64).unwrap();
    (pp, b)
}

fn min_grid(u: &SpectralField) -> f64 {
    synthesize(u)
        .values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn nonlinearity_examples() {
    let (pp, _) = reference(1.0);
    assert!((nonlinearity(1.0, &pp) - 2.0).abs() < 1e-15);
    assert!((primitive(1.0, &pp) - 1.0).abs() < 1e-15);
    assert_eq!(nonlinearity(-1.0, &pp), 0.0);
    assert_eq!(primitive(-1.0, &pp), 0.0);
    assert!((nonlinearity(4.0, &pp.with_lambda(3.0)) - 22.0).abs() < 1e-13);
}

#[test]
fn concave_solution_scales_with_lambda() {
    let (pp, b) = reference(1.0);
    let z = solve_concave(1.0, &pp, &b, TOL).unwrap();
    assert!(z.converged && z.residual_norm < TOL);
    let scale = 2f64.powf(1.0 - pp.q_exp);
    let z2 = solve_concave(scale, &pp, &b, TOL).unwrap();
    assert!(z2.solution.scaled(0.5).max_abs_diff(&z.solution) < 10.0 * TOL);
}

#[test]
fn concave_solution_agrees_with_newton() {
    let (pp, b) = reference(1.0);
    let z = solve_concave(1.0, &pp, &b, TOL).unwrap();
    assert!(min_grid(&z.solution) >= 0.0 && z.sup_norm() > 0.0);
    let n = concave_newton(1.0, &pp, &z.solution.scaled(1.2), TOL).unwrap();
    assert!(n.converged);
    assert!(n.solution.max_abs_diff(&z.solution) < 1e-9);
}

#[test]
fn small_lambda_asymptotics() {
    let (pp, b) = reference(1.0);
    let z = solve_concave(1.0, &pp, &b, TOL).unwrap().solution;
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&lam| {
            let w = minimal_solution(&pp.with_lambda(lam), &b, 1e-6 * lam * lam, 1e3).unwrap();
            let approx = z.scaled(lam.powf(1.0 / (1.0 - pp.q_exp)));
            w.solution.sub(&approx).l2_norm() / approx.l2_norm()
        })
        .collect();
    assert!(gaps.windows(2).all(|g| g[1] < 0.1 * g[0]), "{gaps:?}");
}

#[test]
fn minimal_solution_regression() {
    let (pp, _) = reference(0.1);
    let b = build_basis(pp.domain.clone(), 256).unwrap();
    let r = minimal_solution(&pp, &b, TOL, 1e3).unwrap();
    assert!(r.converged);
    assert_eq!(r.outcome, Outcome::Converged);
    assert!(r.residual_norm < TOL);
    // Pinned from the first converged run at this resolution.
    assert!(
        (r.sup_norm() / 3.643713327538e-3 - 1.0).abs() < 1e-8,
        "{}",
        r.sup_norm()
    );
    // The extension route sees the same equation.
    let grid = Arc::new(CylinderGrid::new(&pp.domain, 255, 256, 0.5, None).unwrap());
    let w = extend_fd(&r.solution, pp.frac, &grid).unwrap();
    let lhs = neumann_trace(&w, pp.frac).unwrap();
    let rhs = synthesize_on(&r.solution, 255).map(|s| nonlinearity(s, &pp));
    assert!(
        relative_l2(&lhs, &rhs) < 1e-2,
        "{}",
        relative_l2(&lhs, &rhs)
    );
    assert!(energy(&r.solution, &pp) < 0.0);
}

#[test]
fn minimal_solutions_increase_with_lambda() {
    let (pp, b) = reference(0.2);
    let lo = minimal_solution(&pp, &b, TOL, 1e3).unwrap();
    let hi = minimal_solution(&pp.with_lambda(0.6), &b, TOL, 1e3).unwrap();
    let d = synthesize(&hi.solution.sub(&lo.solution));
    assert!(d.values.iter().all(|&v| v >= -1e-12));
    let mu = linearized_eigen(&hi.solution, &pp.with_lambda(0.6), 1).unwrap()[0];
    assert!(mu > 0.0);
}

#[test]
fn warm_start_matches_cold_start() {
    let (pp, b) = reference(0.7);
    let cold = minimal_solution(&pp, &b, TOL, 1e3).unwrap();
    let prev = minimal_solution(&pp.with_lambda(0.6), &b, TOL, 1e3).unwrap();
    let warm = minimal_solution_from(&pp, &prev.solution, MonotoneOptions::default()).unwrap();
    assert!(warm.solution.max_abs_diff(&cold.solution) < 10.0 * TOL);
}

#[test]
fn linearization_without_potential_is_the_operator() {
    let (pp, b) = reference(0.5);
    let n = synthesize(&SpectralField::zeros(&b)).values.len();
    let mu = linearized_eigen_with_potential(&b, &pp, &vec![0.0; n], 5).unwrap();
    for (m, l) in mu.iter().zip(&b.eigenvalues) {
        assert!((m - l.powf(0.25)).abs() < 1e-10 * m);
    }
    let shifted = linearized_eigen_with_potential(&b, &pp, &vec![0.75; n], 5).unwrap();
    for (s, m) in shifted.iter().zip(&mu) {
        assert!((s - (m - 0.75)).abs() < 1e-10);
    }
}

#[test]
fn small_norm_threshold_and_uniqueness() {
    let (pp, b) = reference(0.1);
    let t = smallnorm_threshold(&pp, &b).unwrap();
    assert!(t.beta > 0.0);
    assert!(pp.p_exp * t.a_threshold.powf(pp.p_exp - 1.0) < t.beta);
    let w = minimal_solution(&pp, &b, TOL, 1e3).unwrap();
    let n = newton_solve(&w.solution.scaled(1.3), &pp, NewtonOptions::default()).unwrap();
    assert!(n.converged);
    assert!(n.solution.max_abs_diff(&w.solution) < 1e-9);
}

#[test]
fn mountain_pass_gives_a_second_solution() {
    let (pp, b) = reference(0.44);
    let w = minimal_solution(&pp, &b, TOL, 1e3).unwrap();
    let s = second_solution(&pp, &w.solution, MountainPassOptions::default()).unwrap();
    assert!(s.converged && s.residual_norm <= TOL && w.residual_norm <= TOL);
    assert!(s.solution.sub(&w.solution).l2_norm() > 1e-3);
    assert!(energy(&s.solution, &pp) > energy(&w.solution, &pp));
    assert!(min_grid(&s.solution) > -1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_gradient_is_the_residual(
        u in prop::collection::vec(-0.5f64..1.0, 16),
        v in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let (pp, _) = reference(0.5);
        let b = build_basis(pp.domain.clone(), 16).unwrap();
        let u = SpectralField::from_coeffs(&b, u).unwrap();
        let v = SpectralField::from_coeffs(&b, v).unwrap();
        let eps = 1e-4;
        let fd = (energy(&u.add_scaled(eps, &v), &pp) - energy(&u.add_scaled(-eps, &v), &pp)) / (2.0 * eps);
        let r = fraccx_core::semilinear::residual(&u, &pp).unwrap();
        prop_assert!((fd - r.dot(&v)).abs() < 1e-5 * (1.0 + fd.abs()), "{fd} vs {}", r.dot(&v));
    }

    #[test]
    fn concave_solutions_are_ordered(l1 in 0.05f64..2.0, l2 in 0.05f64..2.0) {
        let (pp, b) = reference(1.0);
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let a = solve_concave(lo, &pp, &b, TOL).unwrap();
        let c = solve_concave(hi, &pp, &b, TOL).unwrap();
        prop_assert!(synthesize(&c.solution.sub(&a.solution)).values.iter().all(|&d| d >= -1e-10));
    }
}
