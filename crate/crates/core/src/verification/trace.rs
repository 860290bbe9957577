use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::quadrature::{composite_gl, fourier_cosine, tanh_sinh, GaussLegendre};
use crate::special::{kappa, trace_constant, FracParams};

/// Exponent `e` of the candidate extremal `(x² + τ²)^{−e}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentChoice {
    /// `e = (N − α)/2`.
    NMinusAlpha,
    /// `e = (N + α)/2`.
    NPlusAlpha,
}

impl ExponentChoice {
    pub fn exponent(self, alpha: f64, n_dim: usize) -> f64 {
        let n = n_dim as f64;
        match self {
            ExponentChoice::NMinusAlpha => 0.5 * (n - alpha),
            ExponentChoice::NPlusAlpha => 0.5 * (n + alpha),
        }
    }
}

const REL_TOL: f64 = 1e-10;
const DE_MESH: f64 = 0.05;

/// `(x² + τ²)^{−e}` without overflow for large `|x|`.
fn bump(x: f64, tau: f64, e: f64) -> f64 {
    let ax = x.abs();
    if ax > tau {
        ax.powf(-2.0 * e) * (1.0 + (tau / ax).powi(2)).powf(-e)
    } else {
        (ax * ax + tau * tau).powf(-e)
    }
}

/// `∫_0^∞ g` as `∫_0^X g + ∫_0^1 g(X/s) X/s² ds`.
fn half_line<G: Fn(f64) -> f64>(x_split: f64, g: G) -> Result<f64> {
    let near = tanh_sinh(0.0, x_split, REL_TOL, &g)?;
    let far = tanh_sinh(0.0, 1.0, REL_TOL, |s| {
        let x = x_split / s;
        let val = g(x) * x_split / (s * s);
        if val.is_finite() {
            val
        } else {
            0.0
        }
    })?;
    Ok(near + far)
}

/// Fourier transform `∫ v(x) e^{−2πixξ} dx` of an even profile at `ξ > 0`.
fn even_transform<V: Fn(f64) -> f64>(xi: f64, v: &V) -> f64 {
    2.0 * fourier_cosine(2.0 * PI * xi, DE_MESH, v)
}

fn check(alpha: f64, n_dim: usize, tau: f64) -> Result<FracParams> {
    let p = FracParams::new(alpha, n_dim)?;
    if n_dim != 1 || alpha >= 1.0 {
        return Err(FracError::Domain(
            "trace quotients are computed for N = 1 and α < 1".into(),
        ));
    }
    if !(tau > 0.0) {
        return Err(FracError::Domain(format!(
            "tau must be positive, got {tau}"
        )));
    }
    Ok(p)
}

/// `2 ∫_0^Ξ |2πξ|^α |v̂(ξ)|² dξ` for an even profile with transform `vhat`.
fn seminorm_even<H: Fn(f64) -> f64>(alpha: f64, xi_max: f64, vhat: H) -> Result<f64> {
    Ok(2.0
        * tanh_sinh(0.0, xi_max, REL_TOL, |xi| {
            ((2.0 * PI * xi).powf(0.5 * alpha) * vhat(xi)).powi(2)
        })?)
}

fn quotient_even<V: Fn(f64) -> f64>(alpha: f64, tau: f64, v: V) -> Result<f64> {
    let r = 2.0 / (1.0 - alpha);
    let num = 2.0 * half_line(tau, |x| v(x).abs().powf(r))?;
    let den = seminorm_even(alpha, 50.0 / tau, |xi| even_transform(xi, &v))?;
    Ok(num.powf(2.0 / r) / (kappa(alpha)? * den))
}

/// `‖v‖²_{L^{2N/(N−α)}} / (κ_α ‖v‖²_{Ḣ^{α/2}})` for `v = (x² + τ²)^{−e}`.
pub fn trace_rayleigh(alpha: f64, n_dim: usize, tau: f64, choice: ExponentChoice) -> Result<f64> {
    check(alpha, n_dim, tau)?;
    let e = choice.exponent(alpha, n_dim);
    quotient_even(alpha, tau, |x| bump(x, tau, e))
}

/// Quotient of `v(x)(1 + ε sin x)` with `v` as in [`trace_rayleigh`].
///
/// The seminorm uses the shift rule for the transform of `v sin x`, which is
/// square integrable against `|ξ|^α` only for `α < 1/2` when `e = (1−α)/2`.
pub fn trace_rayleigh_perturbed(
    alpha: f64,
    tau: f64,
    choice: ExponentChoice,
    eps: f64,
) -> Result<f64> {
    check(alpha, 1, tau)?;
    let e = choice.exponent(alpha, 1);
    if 2.0 * e <= 0.5 {
        return Err(FracError::DivergentIntegral(
            "perturbed profile is not in L²".into(),
        ));
    }
    let r = 2.0 / (1.0 - alpha);
    let v = |x: f64| bump(x, tau, e);

    // Numerator: whole periods on [−X, X], then the period mean of (1+ε sin)^r
    // times the tail of v^r.
    let gl = GaussLegendre::new(16);
    let periods = 2000;
    let x_split = 2.0 * PI * periods as f64;
    let body = composite_gl(&gl, -x_split, x_split, 8 * periods, |x| {
        (v(x) * (1.0 + eps * x.sin())).abs().powf(r)
    });
    let mean = composite_gl(&gl, 0.0, 2.0 * PI, 8, |t| {
        (1.0 + eps * t.sin()).abs().powf(r)
    }) / (2.0 * PI);
    let tail = tanh_sinh(0.0, 1.0, REL_TOL, |s| {
        let val = v(x_split / s).powf(r) * x_split / (s * s);
        if val.is_finite() {
            val
        } else {
            0.0
        }
    })?;
    let num = body + 2.0 * mean * tail;

    // |F(ξ)|² = v̂(ξ)² + (ε/2)² (v̂(ξ−c) − v̂(ξ+c))², c = 1/(2π); every piece
    // below keeps its singular point at the left end.
    let c = 0.5 / PI;
    let vh = |xi: f64| even_transform(xi.abs(), &v);
    let weight = |xi: f64| (2.0 * PI * xi).powf(0.5 * alpha);
    let k = 0.25 * eps * eps;
    let full = |xi: f64, shifted_minus: f64| {
        let w = weight(xi);
        (w * vh(xi)).powi(2) + k * (w * (shifted_minus - vh(xi + c))).powi(2)
    };
    let p1 = tanh_sinh(0.0, 0.5 * c, REL_TOL, |xi| full(xi, vh(c - xi)))?;
    let p2 = tanh_sinh(0.0, 0.5 * c, REL_TOL, |eta| full(c - eta, vh(eta)))?;
    let p3 = tanh_sinh(0.0, c, REL_TOL, |zeta| full(c + zeta, vh(zeta)))?;
    let p4 = tanh_sinh(0.0, 50.0 / tau, REL_TOL, |d| {
        let xi = 2.0 * c + d;
        full(xi, vh(xi - c))
    })?;
    let den = 2.0 * (p1 + p2 + p3 + p4);
    Ok(num.powf(2.0 / r) / (kappa(alpha)? * den))
}

/// Quotient of a profile supported in `[−radius, radius]`.
///
/// The transform is computed by composite Gauss-Legendre on the support, so
/// `v` should be smooth there.
pub fn rayleigh_quotient_compact<V: Fn(f64) -> f64>(alpha: f64, radius: f64, v: V) -> Result<f64> {
    check(alpha, 1, radius)?;
    let r = 2.0 / (1.0 - alpha);
    let gl = GaussLegendre::new(16);
    let panels = 64;
    let num = composite_gl(&gl, -radius, radius, panels, |x| v(x).abs().powf(r));
    let nodes: Vec<(f64, f64)> = {
        let mut out = Vec::with_capacity(panels * gl.nodes.len());
        let w = 2.0 * radius / panels as f64;
        for i in 0..panels {
            let lo = -radius + i as f64 * w;
            for (t, wt) in gl.nodes.iter().zip(&gl.weights) {
                let x = lo + 0.5 * w * (t + 1.0);
                out.push((x, 0.5 * w * wt * v(x)));
            }
        }
        out
    };
    let power = |xi: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for &(x, wv) in &nodes {
            let (s, c) = (2.0 * PI * xi * x).sin_cos();
            re += wv * c;
            im -= wv * s;
        }
        re * re + im * im
    };
    // Transform of a smooth bump decays faster than any power beyond ~ 1/radius.
    let xi_max = 200.0 / radius;
    let den = 2.0
        * tanh_sinh(0.0, xi_max, 1e-9, |xi| {
            (2.0 * PI * xi).powf(alpha) * power(xi)
        })?;
    Ok(num.powf(2.0 / r) / (kappa(alpha)? * den))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub label: String,
    pub quotient: f64,
    /// `quotient / S(α, N)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalScan {
    pub alpha: f64,
    pub trace_constant: f64,
    pub entries: Vec<ScanEntry>,
    pub best_label: String,
}

/// Quotients of both exponent candidates at two scales, a Gaussian, and for
/// `α < 1/2` the sinusoidally perturbed candidates.
pub fn extremal_scan(alpha: f64, n_dim: usize) -> Result<ExtremalScan> {
    let p = check(alpha, n_dim, 1.0)?;
    let s = trace_constant(p)?;
    let mut entries = Vec::new();
    let mut push = |label: String, q: f64| {
        entries.push(ScanEntry {
            label,
            quotient: q,
            ratio: q / s,
        })
    };
    for choice in [ExponentChoice::NMinusAlpha, ExponentChoice::NPlusAlpha] {
        for tau in [1.0, 2.0] {
            push(
                format!("{choice:?} tau={tau}"),
                trace_rayleigh(alpha, n_dim, tau, choice)?,
            );
        }
    }
    push(
        "gaussian".into(),
        quotient_even(alpha, 1.0, |x: f64| (-x * x).exp())?,
    );
    for choice in [ExponentChoice::NMinusAlpha, ExponentChoice::NPlusAlpha] {
        if let Ok(q) = trace_rayleigh_perturbed(alpha, 1.0, choice, 0.3) {
            push(format!("{choice:?} perturbed"), q);
        }
    }
    let best_label = entries
        .iter()
        .max_by(|a, b| a.quotient.partial_cmp(&b.quotient).unwrap())
        .map(|e| e.label.clone())
        .unwrap_or_default();
    Ok(ExtremalScan {
        alpha,
        trace_constant: s,
        entries,
        best_label,
    })
}
