use std::sync::Arc;

use fraccx_core::branch::{
    estimate_lambda_star, trace_branch, uniform_bound_scan, write_branch_csv, BracketReport,
    BranchOptions, StartMode,
};
use fraccx_core::extension::{
    convergence_study, extend_fd, extension_energy, CylinderGrid, TraceMethod,
};
use fraccx_core::semilinear::{
    energy, minimal_solution, second_solution, MonotoneOptions, MountainPassOptions, ProblemParams,
};
use fraccx_core::special::{
    c_constants, hls_constants, kappa, solve_profile, supercritical_nonexistence, trace_constant,
    weighted_energy,
};
use fraccx_core::spectral::io::write_coeffs;
use fraccx_core::spectral::{build_basis, hs_norm, SpectralField};
use fraccx_core::verification::{
    extremal_scan, first_eigenvalue, pohozaev_defect, supercritical_experiment,
};
use fraccx_core::Execution;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig, StartChoice};
use crate::CliError;

pub struct Output {
    pub json: Value,
    pub csv: Option<String>,
    /// False when a solver failed to converge; the artifacts are still written.
    pub converged: bool,
}

fn csv_string<F>(f: F) -> Result<String, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> fraccx_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn monotone(cfg: &RunConfig) -> MonotoneOptions {
    MonotoneOptions {
        tol: cfg.tolerances.residual,
        sup_cap: cfg.tolerances.sup_cap,
        ..MonotoneOptions::default()
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        Command::Constants => constants(cfg),
        Command::Profile => profile(cfg),
        Command::Solve => solve(cfg),
        Command::Branch => branch(cfg),
        Command::LambdaStar => lambda_star(cfg),
        Command::SecondSolution => second(cfg),
        Command::Crosscheck => crosscheck(cfg),
        Command::Pohozaev => pohozaev(cfg),
        Command::TraceCheck => trace_check(cfg),
        Command::Supercritical => supercritical(cfg),
    }
}

fn constants(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.frac;
    let k = kappa(p.alpha)?;
    let (c1, c2) = c_constants(p.alpha)?;
    let mut out = json!({
        "alpha": p.alpha,
        "n_dim": p.n_dim,
        "kappa_alpha": k,
        "c1": c1,
        "c2": c2,
        "beta_c1_minus_kappa": p.alpha * c1 - k,
        "critical_exponent": p.critical_exponent(),
        "first_eigenvalue_power": first_eigenvalue(&cfg.domain, p)?,
    });
    if (p.n_dim as f64) > p.alpha {
        let (b, d, l) = hls_constants(p)?;
        let s = trace_constant(p)?;
        out["hls_b"] = json!(b);
        out["hls_d"] = json!(d);
        out["hls_l"] = json!(l);
        out["trace_constant"] = json!(s);
        out["s_kappa_minus_l2"] = json!(s * k - l * l);
    }
    if let Some(ps) = &cfg.problem {
        out["p_supercritical"] = json!(supercritical_nonexistence(ps.p_exp, p));
    }
    Ok(Output {
        json: out,
        csv: None,
        converged: true,
    })
}

fn profile(cfg: &RunConfig) -> Result<Output, CliError> {
    let o = &cfg.options;
    let beta = o.profile_beta.unwrap_or(cfg.frac.alpha);
    let prof = solve_profile(beta, 40.0, 1e-8)?;
    let (c1, _) = c_constants(beta)?;
    let mut out = json!({
        "beta": beta,
        "c1_numeric": prof.c1_numeric,
        "c1_closed_form": c1,
        "max_residual": prof.max_residual,
        "s_max": prof.s_max,
    });
    let alpha = cfg.frac.alpha;
    if alpha < 2.0 * beta {
        out["weighted_energy"] = json!(weighted_energy(&prof, alpha)?);
        out["kappa_alpha"] = json!(kappa(alpha)?);
    }
    let csv = csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["s", "phi", "dphi"])?;
        let n = o.profile_samples;
        for i in 0..n {
            let s = o.profile_s_max * i as f64 / (n - 1) as f64;
            let (v, d) = prof.eval(s);
            w.write_record([format!("{s:e}"), format!("{v:e}"), format!("{d:e}")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(Output {
        json: out,
        csv: Some(csv),
        converged: true,
    })
}

fn solve(cfg: &RunConfig) -> Result<Output, CliError> {
    let pp = cfg.problem_params(1.0)?;
    let basis = build_basis(cfg.domain.clone(), cfg.resolution.modes)?;
    let r = minimal_solution(&pp, &basis, cfg.tolerances.residual, cfg.tolerances.sup_cap)?;
    let summary = r.summary(&pp)?;
    let csv = csv_string(|buf| write_coeffs(buf, &r.solution))?;
    Ok(Output {
        json: serde_json::to_value(&summary).expect("summary serializes"),
        csv: Some(csv),
        converged: r.converged,
    })
}

fn branch(cfg: &RunConfig) -> Result<Output, CliError> {
    let pp = cfg.problem_params(1.0)?;
    let basis = build_basis(cfg.domain.clone(), cfg.resolution.modes)?;
    let o = &cfg.options;
    let (grid, bracket) = match &o.lambda_grid {
        Some(g) => (g.clone(), None),
        None => {
            let (lo, hi) = estimate_lambda_star(&pp, &basis, cfg.tolerances.lambda, monotone(cfg))?;
            let top = o.lambda_fraction * lo;
            let n = o.lambda_count;
            let g = (1..=n).map(|i| top * i as f64 / n as f64).collect();
            (g, Some(BracketReport::new(lo, hi, &pp, &basis)))
        }
    };
    let opts = BranchOptions {
        monotone: monotone(cfg),
        mode: match o.start {
            StartChoice::Warm => StartMode::Warm,
            StartChoice::Cold => StartMode::Cold,
        },
        execution: Execution::Parallel,
    };
    let result = trace_branch(&pp, &basis, &grid, opts)?;
    let bound = uniform_bound_scan(&result).ok();
    let csv = csv_string(|buf| write_branch_csv(buf, &result))?;
    let converged = result.points.iter().filter(|p| p.converged).count();
    Ok(Output {
        json: json!({
            "resolution_tag": result.resolution_tag,
            "points": result.points.len(),
            "converged_points": converged,
            "grid_bracket": result.lambda_star_bracket,
            "lambda_star": bracket,
            "uniform_bound": bound,
        }),
        csv: Some(csv),
        converged: converged > 0,
    })
}

fn lambda_star(cfg: &RunConfig) -> Result<Output, CliError> {
    let pp = cfg.problem_params(1.0)?;
    let basis = build_basis(cfg.domain.clone(), cfg.resolution.modes)?;
    let (lo, hi) = estimate_lambda_star(&pp, &basis, cfg.tolerances.lambda, monotone(cfg))?;
    let report = BracketReport::new(lo, hi, &pp, &basis);
    Ok(Output {
        json: serde_json::to_value(&report).expect("report serializes"),
        csv: None,
        converged: true,
    })
}

fn second(cfg: &RunConfig) -> Result<Output, CliError> {
    let pp = cfg.problem_params(1.0)?;
    let basis = build_basis(cfg.domain.clone(), cfg.resolution.modes)?;
    let w = minimal_solution(&pp, &basis, cfg.tolerances.residual, cfg.tolerances.sup_cap)?;
    if !w.converged {
        return Ok(Output {
            json: json!({ "minimal": w.summary(&pp)?, "second": Value::Null }),
            csv: None,
            converged: false,
        });
    }
    let mut mp = MountainPassOptions::default();
    mp.newton.tol = cfg.tolerances.residual;
    let s = second_solution(&pp, &w.solution, mp)?;
    let csv = csv_string(|buf| {
        let mut wr = csv::Writer::from_writer(buf);
        wr.write_record(["mode_index", "w_min", "w_mp"])?;
        for (j, (a, b)) in w.solution.coeffs.iter().zip(&s.solution.coeffs).enumerate() {
            wr.write_record([j.to_string(), format!("{a:e}"), format!("{b:e}")])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(Output {
        json: json!({
            "minimal": w.summary(&pp)?,
            "second": s.summary(&pp)?,
            "l2_distance": s.solution.sub(&w.solution).l2_norm(),
            "energy_gap": energy(&s.solution, &pp) - energy(&w.solution, &pp),
        }),
        csv: Some(csv),
        converged: true,
    })
}

fn crosscheck(cfg: &RunConfig) -> Result<Output, CliError> {
    let basis = build_basis(cfg.domain.clone(), cfg.resolution.modes)?;
    let (u, source) = match cfg.problem.as_ref().and_then(|p| p.lambda) {
        Some(_) => {
            let pp = cfg.problem_params(1.0)?;
            let r = minimal_solution(&pp, &basis, cfg.tolerances.residual, cfg.tolerances.sup_cap)?;
            if !r.converged {
                return Ok(Output {
                    json: json!({ "minimal": r.summary(&pp)? }),
                    csv: None,
                    converged: false,
                });
            }
            (r.solution, "minimal_solution")
        }
        None => (SpectralField::mode(&basis, 0, 1.0), "first_mode"),
    };
    let p = cfg.frac;
    let levels: Vec<(usize, usize)> = cfg
        .resolution
        .grid_levels
        .iter()
        .map(|l| (l[0], l[1]))
        .collect();
    let report = convergence_study(&u, p, &levels, TraceMethod::Fit)?;
    let exact = kappa(p.alpha)? * hs_norm(&u, p).powi(2);
    let mut energy_errors = Vec::with_capacity(levels.len());
    for &(nx, ny) in &levels {
        let g = Arc::new(CylinderGrid::new(&cfg.domain, nx, ny, p.alpha, None)?);
        let w = extend_fd(&u, p, &g)?;
        energy_errors.push(extension_energy(&w, p) / exact - 1.0);
    }
    let csv = csv_string(|buf| {
        let mut wr = csv::Writer::from_writer(buf);
        wr.write_record(["nx", "ny", "trace_error", "energy_error"])?;
        for (lvl, e) in report.levels.iter().zip(&energy_errors) {
            wr.write_record([
                lvl.nx.to_string(),
                lvl.ny.to_string(),
                format!("{:e}", lvl.relative_error),
                format!("{e:e}"),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(Output {
        json: json!({
            "field": source,
            "alpha": p.alpha,
            "trace_errors": report.levels.iter().map(|l| l.relative_error).collect::<Vec<_>>(),
            "orders": report.orders,
            "energy_errors": energy_errors,
        }),
        csv: Some(csv),
        converged: true,
    })
}

fn pohozaev(cfg: &RunConfig) -> Result<Output, CliError> {
    let pp = ProblemParams {
        domain: cfg.domain.centered(),
        ..cfg.problem_params(1.0)?
    };
    let mut rows = Vec::new();
    for &m in &cfg.resolution.pohozaev_modes {
        let basis = build_basis(pp.domain.clone(), m)?;
        let r = minimal_solution(&pp, &basis, cfg.tolerances.residual, cfg.tolerances.sup_cap)?;
        if !r.converged {
            return Ok(Output {
                json: json!({ "failed_at_modes": m, "minimal": r.summary(&pp)? }),
                csv: None,
                converged: false,
            });
        }
        let grid = Arc::new(CylinderGrid::new(
            &pp.domain,
            2 * m - 1,
            2 * m,
            pp.frac.alpha,
            None,
        )?);
        let t = pohozaev_defect(&r.solution, &pp, &grid)?;
        rows.push((m, t));
    }
    let orders: Vec<f64> = rows
        .windows(2)
        .map(|w| {
            (w[0].1.defect.abs() / w[1].1.defect.abs()).ln() / (w[1].0 as f64 / w[0].0 as f64).ln()
        })
        .collect();
    let csv = csv_string(|buf| {
        let mut wr = csv::Writer::from_writer(buf);
        wr.write_record([
            "modes",
            "defect",
            "boundary",
            "integral_big_f",
            "integral_u_f",
        ])?;
        for (m, t) in &rows {
            wr.write_record([
                m.to_string(),
                format!("{:e}", t.defect),
                format!("{:e}", t.boundary),
                format!("{:e}", t.integral_big_f),
                format!("{:e}", t.integral_u_f),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(Output {
        json: json!({
            "modes": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
            "defects": rows.iter().map(|r| r.1.defect).collect::<Vec<_>>(),
            "orders": orders,
        }),
        csv: Some(csv),
        converged: true,
    })
}

fn trace_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let scan = extremal_scan(cfg.frac.alpha, cfg.frac.n_dim)?;
    let csv = csv_string(|buf| {
        let mut wr = csv::Writer::from_writer(buf);
        wr.write_record(["label", "quotient", "ratio"])?;
        for e in &scan.entries {
            wr.write_record([
                e.label.clone(),
                format!("{:e}", e.quotient),
                format!("{:e}", e.ratio),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(Output {
        json: serde_json::to_value(&scan).expect("scan serializes"),
        csv: Some(csv),
        converged: true,
    })
}

fn supercritical(cfg: &RunConfig) -> Result<Output, CliError> {
    let pp = cfg.problem_params(0.0)?;
    let report = supercritical_experiment(&pp, cfg.resolution.modes, cfg.tolerances.sup_cap)?;
    let csv = csv_string(|buf| {
        let mut wr = csv::Writer::from_writer(buf);
        wr.write_record([
            "seed_scale",
            "outcome",
            "success",
            "sup_norm",
            "residual",
            "pohozaev_relative",
        ])?;
        for a in &report.attempts {
            wr.write_record([
                format!("{}", a.seed_scale),
                serde_json::to_value(a.outcome)
                    .expect("outcome")
                    .as_str()
                    .unwrap_or("")
                    .to_string(),
                a.success.to_string(),
                format!("{:e}", a.sup_norm),
                format!("{:e}", a.residual_norm),
                format!("{:e}", a.pohozaev_relative),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(Output {
        json: serde_json::to_value(&report).expect("report serializes"),
        csv: Some(csv),
        converged: true,
    })
}
