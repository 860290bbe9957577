use serde::Serialize;

use super::c_constants;
use crate::error::{FracError, Result};
use crate::quadrature::GaussLegendre;

/// Abscissa where the Frobenius series is matched to the integrated solution.
const S_MATCH: f64 = 1.0;
const S_FIRST: f64 = 1e-6;
const GEOMETRIC_NODES: usize = 64;
const STEP: f64 = 0.005;

/// Decaying solution of `φ'' + ((1−β)/s) φ' − φ = 0` with `φ(0) = 1`.
///
/// Tabulated at `s = 0`, on a geometric grid in `[1e-6, 1)`, and on a uniform
/// grid in `[1, s_max]`. [`ExtensionProfile::eval`] is valid for all `s ≥ 0`:
/// a convergent series is used near the origin, quintic Hermite interpolation
/// in the middle and the exponential far-field form beyond `s_max`.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionProfile {
    pub beta: f64,
    pub s_nodes: Vec<f64>,
    pub phi_values: Vec<f64>,
    pub phi_derivatives: Vec<f64>,
    pub s_max: f64,
    /// `c₁` recovered from the matched series, `φ ≈ 1 − c₁ s^β + …`.
    pub c1_numeric: f64,
    /// Largest ODE residual over the interior uniform nodes.
    pub max_residual: f64,
    uniform_start: usize,
    step: f64,
}

struct Series {
    beta: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Series {
    fn new(beta: f64) -> Self {
        let terms = 40;
        let mut a = vec![1.0; terms];
        let mut b = vec![1.0; terms];
        for k in 1..terms {
            let kf = k as f64;
            a[k] = a[k - 1] / (2.0 * kf * (2.0 * kf - beta));
            b[k] = b[k - 1] / ((2.0 * kf + beta) * 2.0 * kf);
        }
        Self { beta, a, b }
    }

    /// Regular solution and its derivative.
    fn regular(&self, s: f64) -> (f64, f64) {
        let s2 = s * s;
        let (mut v, mut d, mut pow) = (0.0, 0.0, 1.0);
        for (k, &ak) in self.a.iter().enumerate() {
            v += ak * pow;
            if k > 0 {
                d += 2.0 * k as f64 * ak * pow / s;
            }
            pow *= s2;
            if ak * pow < 1e-18 * v {
                break;
            }
        }
        (v, d)
    }

    /// Solution behaving like `s^β` and its derivative.
    fn singular(&self, s: f64) -> (f64, f64) {
        let s2 = s * s;
        let (mut v, mut d, mut pow) = (0.0, 0.0, 1.0);
        for (k, &bk) in self.b.iter().enumerate() {
            v += bk * pow;
            d += (2.0 * k as f64 + self.beta) * bk * pow;
            pow *= s2;
            if bk * pow < 1e-18 * v {
                break;
            }
        }
        let sb = s.powf(self.beta);
        (sb * v, sb * d / s)
    }
}

fn rhs(beta: f64, s: f64, phi: f64, dphi: f64) -> f64 {
    phi - (1.0 - beta) / s * dphi
}

/// Integrate the profile ODE and match it to the series at the origin.
///
/// The decaying mode is the growing one when integrating toward `s = 0`, so
/// RK4 is started at `s_max` from the far-field asymptotics and run backward;
/// the two-parameter Frobenius family fixes the normalisation `φ(0) = 1`.
pub fn solve_profile(beta: f64, s_max: f64, tol: f64) -> Result<ExtensionProfile> {
    let (c1, c2) = c_constants(beta)?;
    let far = |s: f64| c2 * s.powf(0.5 * (beta - 1.0)) * (-s).exp();
    if !(s_max > 2.0 * S_MATCH) || far(s_max) >= tol {
        return Err(FracError::Domain(format!(
            "s_max = {s_max} too small: far-field value {:.3e} is not below tol = {tol:.1e}",
            far(s_max)
        )));
    }
    let steps = ((s_max - S_MATCH) / STEP).ceil() as usize;
    let h = (s_max - S_MATCH) / steps as f64;

    let mut u = vec![0.0; steps + 1];
    let mut du = vec![0.0; steps + 1];
    u[steps] = far(s_max);
    du[steps] = u[steps] * (0.5 * (beta - 1.0) / s_max - 1.0);
    for i in (0..steps).rev() {
        let s = S_MATCH + (i + 1) as f64 * h;
        let (y, z) = (u[i + 1], du[i + 1]);
        let hm = -h;
        let k1y = z;
        let k1z = rhs(beta, s, y, z);
        let k2y = z + 0.5 * hm * k1z;
        let k2z = rhs(beta, s + 0.5 * hm, y + 0.5 * hm * k1y, k2y);
        let k3y = z + 0.5 * hm * k2z;
        let k3z = rhs(beta, s + 0.5 * hm, y + 0.5 * hm * k2y, k3y);
        let k4y = z + hm * k3z;
        let k4z = rhs(beta, s + hm, y + hm * k3y, k4y);
        u[i] = y + hm / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        du[i] = z + hm / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    }

    let series = Series::new(beta);
    let (pa, dpa) = series.regular(S_MATCH);
    let (pb, dpb) = series.singular(S_MATCH);
    let det = pa * dpb - pb * dpa;
    let coef_a = (u[0] * dpb - pb * du[0]) / det;
    let coef_b = (pa * du[0] - u[0] * dpa) / det;
    if !(coef_a.is_finite() && coef_a > 0.0) {
        return Err(FracError::IterationFailure {
            method: "profile matching",
            iterations: steps,
            residual: coef_a,
        });
    }
    let ratio = coef_b / coef_a;
    for v in u.iter_mut().chain(du.iter_mut()) {
        *v /= coef_a;
    }

    let mut s_nodes = Vec::with_capacity(GEOMETRIC_NODES + steps + 2);
    let mut phi_values = Vec::with_capacity(s_nodes.capacity());
    let mut phi_derivatives = Vec::with_capacity(s_nodes.capacity());
    s_nodes.push(0.0);
    phi_values.push(1.0);
    phi_derivatives.push(if beta < 1.0 {
        f64::NEG_INFINITY
    } else if beta == 1.0 {
        ratio
    } else {
        0.0
    });
    let ln_lo = S_FIRST.ln();
    let ln_hi = S_MATCH.ln();
    for k in 0..GEOMETRIC_NODES {
        let s = (ln_lo + (ln_hi - ln_lo) * k as f64 / GEOMETRIC_NODES as f64).exp();
        let (v, d) = eval_series(&series, ratio, s);
        s_nodes.push(s);
        phi_values.push(v);
        phi_derivatives.push(d);
    }
    let uniform_start = s_nodes.len();
    for i in 0..=steps {
        s_nodes.push(S_MATCH + i as f64 * h);
        phi_values.push(u[i]);
        phi_derivatives.push(du[i]);
    }

    let mut max_residual: f64 = 0.0;
    for i in 2..steps - 1 {
        let s = S_MATCH + i as f64 * h;
        let d2 = (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2])
            / (12.0 * h * h);
        let d1 = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h);
        max_residual = max_residual.max((d2 + (1.0 - beta) / s * d1 - u[i]).abs());
    }
    let series_mismatch = ((-ratio - c1) / c1).abs();
    if max_residual > tol || series_mismatch > tol.max(1e-9) {
        return Err(FracError::IterationFailure {
            method: "profile shooting",
            iterations: steps,
            residual: max_residual.max(series_mismatch),
        });
    }
    if phi_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FracError::Inconsistent(
            "profile is not strictly decreasing".into(),
        ));
    }

    Ok(ExtensionProfile {
        beta,
        s_nodes,
        phi_values,
        phi_derivatives,
        s_max,
        c1_numeric: -ratio,
        max_residual,
        uniform_start,
        step: h,
    })
}

fn eval_series(series: &Series, ratio: f64, s: f64) -> (f64, f64) {
    let (pa, dpa) = series.regular(s);
    let (pb, dpb) = series.singular(s);
    (pa + ratio * pb, dpa + ratio * dpb)
}

impl ExtensionProfile {
    fn series(&self) -> Series {
        Series::new(self.beta)
    }

    /// `(φ(s), φ'(s))` for any `s ≥ 0`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        if s <= 0.0 {
            return (1.0, self.phi_derivatives[0]);
        }
        if s < S_MATCH {
            return eval_series(&self.series(), -self.c1_numeric, s);
        }
        self.eval_outer(s)
    }

    /// Evaluate many abscissae sharing one series table.
    pub fn eval_many(&self, s: &[f64]) -> Vec<(f64, f64)> {
        let series = self.series();
        s.iter()
            .map(|&x| {
                if x <= 0.0 {
                    (1.0, self.phi_derivatives[0])
                } else if x < S_MATCH {
                    eval_series(&series, -self.c1_numeric, x)
                } else {
                    self.eval_outer(x)
                }
            })
            .collect()
    }

    /// Largest argument covered by the tabulated solution.
    pub fn coverage(&self) -> f64 {
        self.s_max
    }

    fn eval_outer(&self, s: f64) -> (f64, f64) {
        let last = self.s_nodes.len() - 1;
        if s >= self.s_max {
            let v = self.phi_values[last]
                * (s / self.s_max).powf(0.5 * (self.beta - 1.0))
                * (-(s - self.s_max)).exp();
            return (v, v * (0.5 * (self.beta - 1.0) / s - 1.0));
        }
        let steps = last - self.uniform_start;
        let pos = (s - S_MATCH) / self.step;
        let i = (pos.floor() as usize).min(steps - 1);
        self.hermite(i, pos - i as f64)
    }

    fn hermite(&self, seg: usize, t: f64) -> (f64, f64) {
        let i0 = self.uniform_start + seg;
        let h = self.step;
        let (s0, s1) = (self.s_nodes[i0], self.s_nodes[i0 + 1]);
        let (f0, f1) = (self.phi_values[i0], self.phi_values[i0 + 1]);
        let (d0, d1) = (self.phi_derivatives[i0], self.phi_derivatives[i0 + 1]);
        let (e0, e1) = (rhs(self.beta, s0, f0, d0), rhs(self.beta, s1, f1, d1));
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let v = f0 * h0 + h * d0 * h1 + h * h * e0 * h2 + h * h * e1 * h3 + h * d1 * h4 + f1 * h5;
        let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let g3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g5 = -g0;
        let d =
            (f0 * g0 + h * d0 * g1 + h * h * e0 * g2 + h * h * e1 * g3 + h * d1 * g4 + f1 * g5) / h;
        (v, d)
    }
}

/// `H_α(φ) = ∫₀^∞ (φ² + φ'²) s^{1−α} ds` for a solved profile.
///
/// Near the origin the integrand behaves like `s^{2β−1−α}`; dyadic panels
/// resolve it down to `2^{-60}` and the remainder is integrated from the
/// leading-order expansion.
pub fn weighted_energy(profile: &ExtensionProfile, alpha: f64) -> Result<f64> {
    let beta = profile.beta;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(FracError::Domain(format!(
            "alpha must lie in (0, 2), got {alpha}"
        )));
    }
    if alpha >= 2.0 * beta {
        return Err(FracError::DivergentIntegral(format!(
            "weighted energy diverges at the origin for alpha = {alpha} >= 2 beta = {}",
            2.0 * beta
        )));
    }
    let w = 1.0 - alpha;
    let rule = GaussLegendre::new(16);
    let series = profile.series();
    let ratio = -profile.c1_numeric;
    let integrand = |s: f64, (v, d): (f64, f64)| (v * v + d * d) * s.powf(w);

    const DYADIC: i32 = 60;
    let mut inner = 0.0;
    for k in 0..DYADIC {
        let hi = S_MATCH * 0.5f64.powi(k);
        let lo = 0.5 * hi;
        inner += rule.integrate(lo, hi, |s| integrand(s, eval_series(&series, ratio, s)));
    }
    let eps = S_MATCH * 0.5f64.powi(DYADIC);
    let bc = beta * profile.c1_numeric;
    inner += eps.powf(2.0 - alpha) / (2.0 - alpha)
        + bc * bc * eps.powf(2.0 * beta - alpha) / (2.0 * beta - alpha);

    let gl5 = GaussLegendre::new(5);
    let steps = profile.s_nodes.len() - 1 - profile.uniform_start;
    let mut outer = 0.0;
    for seg in 0..steps {
        let s0 = S_MATCH + seg as f64 * profile.step;
        outer += gl5.integrate(0.0, 1.0, |t| {
            integrand(s0 + t * profile.step, profile.hermite(seg, t))
        });
    }
    outer *= profile.step;
    Ok(inner + outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::kappa;

    #[test]
    fn beta_one_is_exponential() {
        let p = solve_profile(1.0, 40.0, 1e-8).unwrap();
        for (&s, (&v, &d)) in p
            .s_nodes
            .iter()
            .zip(p.phi_values.iter().zip(&p.phi_derivatives))
        {
            assert!((v - (-s).exp()).abs() < 1e-9, "s={s}");
            assert!((d + (-s).exp()).abs() < 1e-8, "s={s}");
        }
        for &s in &[0.3, 1.7, 12.345, 39.99, 45.0] {
            let (v, d) = p.eval(s);
            assert!((v - (-s).exp()).abs() < 1e-9);
            assert!((d + (-s).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn near_origin_expansion() {
        for &beta in &[0.3, 0.5, 1.5] {
            let p = solve_profile(beta, 40.0, 1e-8).unwrap();
            let (c1, _) = c_constants(beta).unwrap();
            let s = 1e-10;
            let (v, d) = p.eval(s);
            if beta <= 0.5 {
                assert!(((1.0 - v) / s.powf(beta) - c1).abs() < 1e-4 * c1);
            }
            let k = -s.powf(1.0 - beta) * d;
            assert!((k - kappa(beta).unwrap()).abs() < 1e-4, "beta={beta}");
        }
    }

    #[test]
    fn energy_rejects_divergent_order() {
        let p = solve_profile(0.5, 40.0, 1e-8).unwrap();
        assert!(matches!(
            weighted_energy(&p, 1.0),
            Err(FracError::DivergentIntegral(_))
        ));
    }

    #[test]
    fn short_truncation_is_rejected() {
        assert!(solve_profile(0.5, 5.0, 1e-8).is_err());
    }
}
