//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use fraccx_core::branch::{estimate_lambda_star, trace_branch, uniform_bound_scan, BranchOptions};
use fraccx_core::extension::{
    convergence_study, extend_fd, extension_energy, CylinderGrid, TraceMethod,
};
use fraccx_core::semilinear::{
    energy, minimal_solution, newton_solve, second_solution, smallnorm_threshold, solve_concave,
    MonotoneOptions, MountainPassOptions, NewtonOptions, ProblemParams,
};
use fraccx_core::special::{
    c_constants, gamma_fn, hls_constants, kappa, solve_profile, supercritical_nonexistence,
    trace_constant, weighted_energy,
};
use fraccx_core::spectral::{build_basis, hs_norm, synthesize, DomainSpec, SpectralField};
use fraccx_core::verification::{
    extremal_scan, pohozaev_defect, rayleigh_quotient_compact, supercritical_experiment,
    trace_rayleigh, trace_rayleigh_perturbed, ExponentChoice,
};
use fraccx_core::{FracError, FracParams};

const MODES: usize = 256;
const TOL: f64 = 1e-10;
const SUP_CAP: f64 = 1e3;

const CONSTANT_TOL: f64 = 1e-12;
const KAPPA_LIMIT_TOL: f64 = 1e-2;
const PROFILE_POINTWISE_TOL: f64 = 1e-6;
const PROFILE_ENERGY_TOL: f64 = 1e-6;
const PROFILE_KAPPA_TOL: f64 = 1e-4;
const ORACLE_L2_TOL: f64 = 1e-2;
const ORACLE_MIN_ORDER: f64 = 1.0;
const ORACLE_ENERGY_TOL: f64 = 1e-3;
const SCALING_TOL: f64 = 1e-8;
const BRANCH_POINTS: usize = 20;
const BRANCH_FRACTION: f64 = 0.98;
const MU1_FLOOR: f64 = -1e-6;
const LAMBDA_TOL: f64 = 1e-4;
const BRACKET_REL_WIDTH: f64 = 1e-3;
const BRACKET_DRIFT: f64 = 1e-2;
const ASYMPTOTIC_FINAL: f64 = 1e-2;
const MP_LAMBDA: f64 = 0.44;
const MP_RESIDUAL: f64 = 1e-8;
const MP_SEPARATION: f64 = 1e-3;
const POHOZAEV_MIN_ORDER: f64 = 1.0;
const TRACE_SLACK: f64 = 1e-2;
const TRACE_BEST: f64 = 0.99;
const UNIFORM_DRIFT: f64 = 1e-2;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn reference(lambda: f64) -> ProblemParams {
    ProblemParams::new(
        lambda,
        0.5,
        2.0,
        FracParams::new(0.5, 1).unwrap(),
        DomainSpec::interval(1.0),
    )
    .unwrap()
}

fn fail(e: FracError) -> String {
    format!("error: {e}")
}

fn verdict(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn constants() -> Check {
    let k1 = kappa(1.0).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for &alpha in &[0.1, 0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.9] {
        let (c1, _) = c_constants(alpha).map_err(fail)?;
        let k = kappa(alpha).map_err(fail)?;
        worst = worst.max((alpha * c1 - k).abs() / k);
        for n in 1..=4usize {
            if n as f64 <= alpha {
                continue;
            }
            let p = FracParams::new(alpha, n).map_err(fail)?;
            let (_, _, l) = hls_constants(p).map_err(fail)?;
            let s = trace_constant(p).map_err(fail)?;
            worst = worst.max((s * k - l * l).abs() / (l * l));
        }
    }
    let limit = (2.0 - 1.999) * kappa(1.999).map_err(fail)?;
    verdict(
        k1 == 1.0 && worst < CONSTANT_TOL && (limit - 1.0).abs() < KAPPA_LIMIT_TOL,
        format!(
            "kappa_1 = {k1}, worst identity error {worst:.1e}, (2-a)kappa at 1.999 = {limit:.5}"
        ),
    )
}

fn profiles() -> Check {
    let p1 = solve_profile(1.0, 40.0, 1e-10).map_err(fail)?;
    let pointwise = (0..=400)
        .map(|i| {
            let s = 0.05 * i as f64;
            (p1.eval(s).0 - (-s).exp()).abs()
        })
        .fold(0.0, f64::max);
    let mut energy_err: f64 = 0.0;
    for &alpha in &[0.3, 0.5, 1.0, 1.5] {
        let exact = 2f64.powf(alpha - 1.0) * gamma_fn(2.0 - alpha).map_err(fail)?;
        energy_err =
            energy_err.max((weighted_energy(&p1, alpha).map_err(fail)? / exact - 1.0).abs());
    }
    let mut kappa_err: f64 = 0.0;
    for &alpha in &[0.3, 0.5, 1.0, 1.5] {
        let p = solve_profile(alpha, 40.0, 1e-10).map_err(fail)?;
        kappa_err = kappa_err.max(
            (weighted_energy(&p, alpha).map_err(fail)? / kappa(alpha).map_err(fail)? - 1.0).abs(),
        );
    }
    verdict(
        pointwise < PROFILE_POINTWISE_TOL && energy_err < PROFILE_ENERGY_TOL && kappa_err < PROFILE_KAPPA_TOL,
        format!("|phi_1 - e^-s| {pointwise:.1e}, H(phi_1) {energy_err:.1e}, H(phi_a)/kappa {kappa_err:.1e}"),
    )
}

fn oracle() -> Check {
    let pp = reference(0.5);
    let b = build_basis(pp.domain.clone(), MODES).map_err(fail)?;
    let u = minimal_solution(&pp, &b, TOL, SUP_CAP)
        .map_err(fail)?
        .solution;
    // Coarsest grid still resolves every mode of the basis.
    let levels = [(127, 128), (255, 256), (511, 512), (1023, 1024)];
    let r = convergence_study(&u, pp.frac, &levels, TraceMethod::Fit).map_err(fail)?;
    let reference_err = r.levels[1].relative_error;
    let min_order = r.orders.iter().copied().fold(f64::INFINITY, f64::min);
    let g = Arc::new(CylinderGrid::new(&pp.domain, 255, 256, pp.frac.alpha, None).map_err(fail)?);
    let e = extension_energy(&extend_fd(&u, pp.frac, &g).map_err(fail)?, pp.frac);
    let exact = kappa(pp.frac.alpha).map_err(fail)? * hs_norm(&u, pp.frac).powi(2);
    let energy_err = (e / exact - 1.0).abs();
    verdict(
        reference_err < ORACLE_L2_TOL && min_order >= ORACLE_MIN_ORDER && energy_err < ORACLE_ENERGY_TOL,
        format!(
            "trace error {reference_err:.2e} at 255x256, orders {:?}, energy error {energy_err:.1e}",
            r.orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn concave_scaling() -> Check {
    let pp = reference(1.0);
    let b = build_basis(pp.domain.clone(), MODES).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for &lam in &[0.25, 1.0, 4.0] {
        let a = solve_concave(lam, &pp, &b, 1e-13).map_err(fail)?.solution;
        let c = solve_concave(2.0 * lam, &pp, &b, 1e-13)
            .map_err(fail)?
            .solution;
        let scaled = a.scaled(2f64.powf(1.0 / (1.0 - pp.q_exp)));
        worst = worst.max(
            c.max_abs_diff(&scaled) / scaled.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        );
    }
    verdict(
        worst < SCALING_TOL,
        format!("max relative coefficient error {worst:.1e}"),
    )
}

fn branch_structure() -> Check {
    let pp = reference(0.1);
    let mono = MonotoneOptions::default();
    let mut brackets = Vec::new();
    let mut pointwise_ok = true;
    let mut mu_min = f64::INFINITY;
    for modes in [MODES, 2 * MODES] {
        let b = build_basis(pp.domain.clone(), modes).map_err(fail)?;
        let (lo, hi) = estimate_lambda_star(&pp, &b, LAMBDA_TOL, mono).map_err(fail)?;
        brackets.push((lo, hi));
        if modes == MODES {
            let grid: Vec<f64> = (1..=BRANCH_POINTS)
                .map(|i| BRANCH_FRACTION * lo * i as f64 / BRANCH_POINTS as f64)
                .collect();
            let r = trace_branch(&pp, &b, &grid, BranchOptions::default()).map_err(fail)?;
            if !r.points.iter().all(|p| p.converged) {
                return Err("branch point failed to converge".into());
            }
            for w in r.points.windows(2) {
                let d = synthesize(&w[1].coeffs.sub(&w[0].coeffs));
                pointwise_ok &= d.values.iter().all(|&v| v >= -1e-12);
            }
            mu_min = r.points.iter().map(|p| p.mu1).fold(mu_min, f64::min);
        }
    }
    let (lo, hi) = brackets[0];
    let width = (hi - lo) / hi;
    let drift = (brackets[1].0 - lo).abs() / lo;
    verdict(
        pointwise_ok && mu_min >= MU1_FLOOR && width <= BRACKET_REL_WIDTH && drift < BRACKET_DRIFT,
        format!(
            "Lambda in [{lo:.5}, {hi:.5}] (rel width {width:.1e}), drift to {} modes {drift:.1e}, min mu1 {mu_min:.3}, monotone {pointwise_ok}",
            2 * MODES
        ),
    )
}

fn asymptotics() -> Check {
    let pp = reference(1.0);
    let b = build_basis(pp.domain.clone(), MODES).map_err(fail)?;
    let z = solve_concave(1.0, &pp, &b, 1e-13).map_err(fail)?.solution;
    let mut gaps = Vec::new();
    for &lam in &[1e-1f64, 1e-2, 1e-3, 1e-4] {
        let scale = lam.powf(1.0 / (1.0 - pp.q_exp));
        let w = minimal_solution(&pp.with_lambda(lam), &b, 1e-10 * scale, SUP_CAP).map_err(fail)?;
        let approx = z.scaled(scale);
        gaps.push(w.solution.sub(&approx).l2_norm() / w.solution.l2_norm());
    }
    let decreasing = gaps.windows(2).all(|g| g[1] < g[0]);
    verdict(
        decreasing && gaps[3] < ASYMPTOTIC_FINAL,
        format!(
            "relative gaps {:?}",
            gaps.iter().map(|g| format!("{g:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn multiplicity() -> Check {
    let pp = reference(MP_LAMBDA);
    let b = build_basis(pp.domain.clone(), MODES).map_err(fail)?;
    let w = minimal_solution(&pp, &b, TOL, SUP_CAP).map_err(fail)?;
    let s = second_solution(&pp, &w.solution, MountainPassOptions::default()).map_err(fail)?;
    let dist = s.solution.sub(&w.solution).l2_norm();
    let (j0, j2) = (energy(&w.solution, &pp), energy(&s.solution, &pp));
    verdict(
        s.converged && dist > MP_SEPARATION && j2 > j0 && w.residual_norm <= MP_RESIDUAL && s.residual_norm <= MP_RESIDUAL,
        format!(
            "lambda {MP_LAMBDA}: |w2 - w| = {dist:.3}, J = {j2:.4} vs {j0:.2e}, residuals {:.1e} / {:.1e}",
            w.residual_norm, s.residual_norm
        ),
    )
}

fn small_norm() -> Check {
    let pp = reference(0.1);
    let b = build_basis(pp.domain.clone(), MODES).map_err(fail)?;
    let t = smallnorm_threshold(&pp, &b).map_err(fail)?;
    let w = minimal_solution(&pp, &b, TOL, SUP_CAP).map_err(fail)?;
    // Second start: a positive bump unrelated to the minimal solution.
    let start = SpectralField::mode(&b, 0, 0.1 * t.a_threshold / 2f64.sqrt());
    let n = newton_solve(
        &start,
        &pp,
        NewtonOptions {
            tol: TOL,
            ..NewtonOptions::default()
        },
    )
    .map_err(fail)?;
    let diff = n.solution.max_abs_diff(&w.solution);
    let below = w.sup_norm() < t.a_threshold && n.sup_norm() < t.a_threshold;
    verdict(
        t.beta > 0.0 && n.converged && below && diff <= 10.0 * TOL,
        format!(
            "beta = {:.4}, A = {:.4}, starts agree to {diff:.1e}",
            t.beta, t.a_threshold
        ),
    )
}

fn pohozaev_and_nonexistence() -> Check {
    let pp = ProblemParams {
        domain: DomainSpec::interval(1.0).centered(),
        ..reference(0.5)
    };
    let mut defects = Vec::new();
    for m in [64, 128, 256] {
        let b = build_basis(pp.domain.clone(), m).map_err(fail)?;
        let u = minimal_solution(&pp, &b, TOL, SUP_CAP)
            .map_err(fail)?
            .solution;
        let g = Arc::new(
            CylinderGrid::new(&pp.domain, 2 * m - 1, 2 * m, pp.frac.alpha, None).map_err(fail)?,
        );
        defects.push(pohozaev_defect(&u, &pp, &g).map_err(fail)?.defect.abs());
    }
    let orders: Vec<f64> = defects.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    let order_ok = orders.iter().all(|&o| o >= POHOZAEV_MIN_ORDER);
    let run = |p_exp: f64| {
        let pp = ProblemParams {
            lambda: 0.0,
            p_exp,
            allow_supercritical: true,
            ..pp.clone()
        };
        supercritical_experiment(&pp, MODES, SUP_CAP)
    };
    let sup = run(3.5).map_err(fail)?;
    let sub = run(2.9).map_err(fail)?;
    let f = pp.frac;
    let boundary = supercritical_nonexistence(3.0, f)
        && !supercritical_nonexistence(3.0 - 1e-12, f)
        && f.critical_exponent() == 3.0;
    let failures = sup.attempts.iter().filter(|a| !a.success).count();
    verdict(
        order_ok && !sup.any_success && sub.any_success && boundary,
        format!(
            "defects {:?}, orders {:?}; p=3.5 failed {failures}/{}, p=2.9 success {}, boundary at 3 {boundary}",
            defects.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>(),
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>(),
            sup.attempts.len(),
            sub.any_success
        ),
    )
}

fn trace_sharpness() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for &alpha in &[0.3, 0.5, 0.8] {
        let s = trace_constant(FracParams::new(alpha, 1).unwrap()).map_err(fail)?;
        let scan = extremal_scan(alpha, 1).map_err(fail)?;
        let best = scan.entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
        ok &= (TRACE_BEST..=1.0 + TRACE_SLACK).contains(&best);
        let gauss = scan
            .entries
            .iter()
            .find(|e| e.label == "gaussian")
            .map(|e| e.ratio)
            .unwrap_or(1.0);
        ok &= gauss < 1.0;
        let bump = rayleigh_quotient_compact(alpha, 1.0, |x: f64| {
            (0.5 * std::f64::consts::PI * x).cos().powi(2)
        })
        .map_err(fail)?;
        ok &= bump < s;
        for choice in [ExponentChoice::NMinusAlpha, ExponentChoice::NPlusAlpha] {
            let base = trace_rayleigh(alpha, 1, 1.0, choice).map_err(fail)?;
            match trace_rayleigh_perturbed(alpha, 1.0, choice, 0.3) {
                Ok(q) => ok &= q < base,
                Err(FracError::DivergentIntegral(_)) => {}
                Err(e) => return Err(fail(e)),
            }
        }
        notes.push(format!("a={alpha}: best {best:.6} ({})", scan.best_label));
    }
    verdict(ok, notes.join(", "))
}

fn uniform_bound() -> Check {
    let pp = ProblemParams::new(
        1.0,
        0.5,
        2.0,
        FracParams::new(1.2, 2).unwrap(),
        DomainSpec::rectangle(1.0, 1.0),
    )
    .map_err(fail)?;
    let coarse = build_basis(pp.domain.clone(), 16).map_err(fail)?;
    let (lo, _) =
        estimate_lambda_star(&pp, &coarse, 1e-3, MonotoneOptions::default()).map_err(fail)?;
    let grid: Vec<f64> = (1..=8)
        .map(|i| BRANCH_FRACTION * lo * i as f64 / 8.0)
        .collect();
    let mut bounds = Vec::new();
    for modes in [16, 32] {
        let b = build_basis(pp.domain.clone(), modes).map_err(fail)?;
        let r = trace_branch(&pp, &b, &grid, BranchOptions::default()).map_err(fail)?;
        bounds.push(uniform_bound_scan(&r).map_err(fail)?.max_sup_norm);
    }
    let drift = (bounds[1] - bounds[0]).abs() / bounds[0];
    verdict(
        drift < UNIFORM_DRIFT,
        format!(
            "max sup {:.5} (16 modes) vs {:.5} (32 modes), drift {drift:.1e}",
            bounds[0], bounds[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("constants", constants),
        ("profile", profiles),
        ("operator-oracle", oracle),
        ("concave-scaling", concave_scaling),
        ("branch-structure", branch_structure),
        ("asymptotics", asymptotics),
        ("multiplicity", multiplicity),
        ("small-norm-uniqueness", small_norm),
        ("pohozaev-nonexistence", pohozaev_and_nonexistence),
        ("trace-sharpness", trace_sharpness),
        ("uniform-bound", uniform_bound),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, msg) = match check() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!(
            "AC{:02} {name:<22} {tag}  {msg}  [{:.1}s]",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
