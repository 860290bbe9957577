use std::sync::Arc;

use fraccx_core::branch::{
    estimate_lambda_star, trace_branch, uniform_bound_scan, write_branch_csv, BracketReport,
    BranchOptions, StartMode,
};
use fraccx_core::semilinear::{MonotoneOptions, ProblemParams};
use fraccx_core::spectral::{build_basis, synthesize, DomainSpec, Eigenbasis};
use fraccx_core::{Execution, FracParams};
use proptest::prelude::*;

fn reference(modes: usize) -> (ProblemParams, Arc<Eigenbasis>) {
    let pp = ProblemParams::new(
        0.1,
        0.5,
        2.0,
        FracParams::new(0.5, 1).unwrap(),
        DomainSpec::interval(1.0),
    )
    .unwrap();
    let b = build_basis(pp.domain.clone(), modes).unwrap();
    (pp, b)
}

fn grid(n: usize, top: f64) -> Vec<f64> {
    (1..=n).map(|i| top * i as f64 / n as f64).collect()
}

#[test]
fn branch_is_increasing_and_stable() {
    let (pp, b) = reference(64);
    let r = trace_branch(&pp, &b, &grid(12, 0.86), BranchOptions::default()).unwrap();
    assert!(r.points.iter().all(|p| p.converged));
    for w in r.points.windows(2) {
        let d = synthesize(&w[1].coeffs.sub(&w[0].coeffs));
        assert!(d.values.iter().all(|&v| v >= -1e-12));
        assert!(w[1].sup_norm > w[0].sup_norm);
    }
    assert!(r.points.iter().all(|p| p.mu1 >= -1e-6));
    assert!(r.lambda_star_bracket.is_none());
    let mut csv = Vec::new();
    write_branch_csv(&mut csv, &r).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 13);
}

#[test]
fn empty_and_single_point_branches() {
    let (pp, b) = reference(32);
    let r = trace_branch(&pp, &b, &[], BranchOptions::default()).unwrap();
    assert!(r.points.is_empty());
    assert!(uniform_bound_scan(&r).is_err());
    let r = trace_branch(&pp, &b, &[0.3], BranchOptions::default()).unwrap();
    let u = uniform_bound_scan(&r).unwrap();
    assert_eq!(u.max_sup_norm, r.points[0].sup_norm);
    assert!(!u.alpha_at_least_one);
    assert!(trace_branch(&pp, &b, &[0.3, 0.2], BranchOptions::default()).is_err());
}

#[test]
fn grid_past_the_fold_records_a_bracket() {
    let (pp, b) = reference(32);
    let r = trace_branch(&pp, &b, &[0.4, 0.8, 1.2, 1.6], BranchOptions::default()).unwrap();
    let (lo, hi) = r.lambda_star_bracket.unwrap();
    assert_eq!((lo, hi), (0.8, 1.2));
}

#[test]
fn bracket_is_narrow_and_below_the_bound() {
    let (pp, b) = reference(64);
    let tol = 1e-3;
    let (lo, hi) = estimate_lambda_star(&pp, &b, tol, MonotoneOptions::default()).unwrap();
    assert!(hi - lo <= tol && lo < hi);
    let rep = BracketReport::new(lo, hi, &pp, &b);
    assert!(rep.hi <= rep.lambda_upper_bound);
    assert!(rep.lo > 0.5);
}

#[test]
fn sequential_and_parallel_cold_branches_agree() {
    let (pp, b) = reference(48);
    let g = grid(6, 0.8);
    let run = |execution| {
        trace_branch(
            &pp,
            &b,
            &g,
            BranchOptions {
                mode: StartMode::Cold,
                execution,
                ..BranchOptions::default()
            },
        )
        .unwrap()
    };
    let s = run(Execution::Sequential);
    let p = run(Execution::Parallel);
    for (a, c) in s.points.iter().zip(&p.points) {
        assert_eq!(a.coeffs.coeffs, c.coeffs.coeffs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn warm_and_cold_starts_agree(top in 0.1f64..0.85, n in 2usize..6) {
        let (pp, b) = reference(32);
        let g = grid(n, top);
        let tol = MonotoneOptions::default().tol;
        let warm = trace_branch(&pp, &b, &g, BranchOptions::default()).unwrap();
        let cold = trace_branch(&pp, &b, &g, BranchOptions { mode: StartMode::Cold, ..BranchOptions::default() }).unwrap();
        for (w, c) in warm.points.iter().zip(&cold.points) {
            prop_assert!(w.converged && c.converged);
            prop_assert!(w.coeffs.max_abs_diff(&c.coeffs) < 10.0 * tol);
        }
    }
}
