use super::newton::{newton_core, NewtonOptions};
use super::{norm, Discrete, MethodTag, Outcome, ProblemParams, SolveReport};
use crate::error::{FracError, Result};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy)]
pub struct MountainPassOptions {
    pub path_points: usize,
    pub max_iter: usize,
    /// Residual at which the path search hands over to Newton.
    pub handoff: f64,
    /// Minimal `L²` distance from the local minimum.
    pub separation: f64,
    pub newton: NewtonOptions,
}

impl Default for MountainPassOptions {
    fn default() -> Self {
        Self {
            path_points: 33,
            max_iter: 4000,
            handoff: 1e-4,
            separation: 1e-3,
            newton: NewtonOptions::default(),
        }
    }
}

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - s) * x + s * y)
        .collect()
}

/// Redistribute the interior path points evenly in energy-norm arclength.
fn reparametrize(d: &Discrete, path: &mut Vec<Vec<f64>>) {
    let n = path.len();
    let mut cum = vec![0.0];
    for w in path.windows(2) {
        let seg: f64 = w[0]
            .iter()
            .zip(&w[1])
            .zip(&d.diag)
            .map(|((a, b), dj)| dj * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        cum.push(cum.last().unwrap() + seg);
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return;
    }
    let mut out = Vec::with_capacity(n);
    out.push(path[0].clone());
    let mut seg = 0;
    for i in 1..n - 1 {
        let target = total * i as f64 / (n - 1) as f64;
        while cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let s = if len > 0.0 {
            (target - cum[seg]) / len
        } else {
            0.0
        };
        out.push(lerp(&path[seg], &path[seg + 1], s));
    }
    out.push(path[n - 1].clone());
    *path = out;
}

/// Mountain-pass critical point above the local minimum `w_min`.
///
/// Builds a path from `w_min` to `t φ₁` with `J(t φ₁) < J(w_min)`, pushes its
/// highest point downhill with the gradient in the `H^{α/2}` metric while the
/// rest of the path follows, then polishes with Newton.
pub fn second_solution(
    pp: &ProblemParams,
    w_min: &SpectralField,
    opts: MountainPassOptions,
) -> Result<SolveReport> {
    pp.validate()?;
    let d = Discrete::new(pp, &w_min.basis)?;
    let j0 = d.energy(&w_min.coeffs);
    let mut phi = vec![0.0; w_min.coeffs.len()];
    phi[0] = 1.0;
    let mut t = 1.0;
    let end = loop {
        let cand: Vec<f64> = phi.iter().map(|v| v * t).collect();
        if d.energy(&cand) < j0 {
            break cand;
        }
        t *= 2.0;
        if t > 1e12 {
            return Err(FracError::MountainPass(
                "energy stays above J(w) along t φ₁".into(),
            ));
        }
    };
    let n = opts.path_points.max(5);
    let mut path: Vec<Vec<f64>> = (0..n)
        .map(|i| lerp(&w_min.coeffs, &end, i as f64 / (n - 1) as f64))
        .collect();
    let mut energies: Vec<f64> = path.iter().map(|a| d.energy(a)).collect();
    let mut top = 0;
    let mut converged_path = false;
    for it in 0..opts.max_iter {
        if it % 10 == 0 {
            reparametrize(&d, &mut path);
            energies = path.iter().map(|a| d.energy(a)).collect();
        }
        top = (0..n)
            .max_by(|&i, &j| energies[i].partial_cmp(&energies[j]).unwrap())
            .unwrap();
        if top == 0 || top == n - 1 {
            return Err(FracError::MountainPass(format!(
                "path maximum at endpoint {top}"
            )));
        }
        let a = &path[top];
        let r = d.residual(a);
        if norm(&r) <= opts.handoff {
            converged_path = true;
            break;
        }
        let g: Vec<f64> = r.iter().zip(&d.diag).map(|(r, dj)| r / dj).collect();
        let slope: f64 = r.iter().zip(&g).map(|(r, g)| r * g).sum();
        let mut tau = 1.0;
        let mut moved = false;
        while tau > 1e-8 {
            let trial: Vec<f64> = a.iter().zip(&g).map(|(a, g)| a - tau * g).collect();
            let e = d.energy(&trial);
            if e <= energies[top] - 1e-4 * tau * slope {
                path[top] = trial;
                energies[top] = e;
                moved = true;
                break;
            }
            tau *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let start = path[top].clone();
    let res = newton_core(&d, &start, opts.newton);
    if !res.converged {
        return Err(FracError::MountainPass(format!(
            "Newton from the path maximum stalled at residual {:.3e} (path search {})",
            res.residual,
            if converged_path {
                "reached handoff"
            } else {
                "stopped early"
            }
        )));
    }
    let sol = d.field(res.coeffs);
    let sep = sol.sub(w_min).l2_norm();
    let j2 = d.energy(&sol.coeffs);
    if sep <= opts.separation || j2 <= j0 {
        return Err(FracError::MountainPass(format!(
            "critical point is not a second solution (distance {sep:.3e}, energy gap {:.3e})",
            j2 - j0
        )));
    }
    Ok(SolveReport {
        solution: sol,
        residual_norm: res.residual,
        iterations: res.iterations,
        converged: true,
        method_tag: MethodTag::MountainPass,
        outcome: Outcome::Converged,
    })
}
