//! Gamma function, the explicit constants of the extension problem, and the
//! Bessel-type extension profile.

mod profile;

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

pub use profile::{solve_profile, weighted_energy, ExtensionProfile};

/// Fractional order `α` and spatial dimension `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracParams {
    pub alpha: f64,
    pub n_dim: usize,
}

impl FracParams {
    pub fn new(alpha: f64, n_dim: usize) -> Result<Self> {
        let p = Self { alpha, n_dim };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(FracError::Domain(format!(
                "fractional order must lie in (0, 2), got {}",
                self.alpha
            )));
        }
        if self.n_dim < 1 {
            return Err(FracError::Domain("dimension must be at least 1".into()));
        }
        Ok(())
    }

    /// Trace-related quantities need `N > α`.
    pub fn require_trace_range(&self) -> Result<()> {
        self.validate()?;
        if (self.n_dim as f64) <= self.alpha {
            return Err(FracError::Domain(format!(
                "need N > alpha, got N = {} and alpha = {}",
                self.n_dim, self.alpha
            )));
        }
        Ok(())
    }

    /// Critical exponent `(N+α)/(N−α)`; infinite when `N ≤ α`.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.n_dim as f64;
        if n <= self.alpha {
            f64::INFINITY
        } else {
            (n + self.alpha) / (n - self.alpha)
        }
    }
}

const LANCZOS_G: f64 = 10.900511;
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
const TWO_SQRT_E_OVER_PI: f64 =
    1.860_382_734_205_265_717_336_249_247_266_663_112_059_421_841_408_575_5;

fn lanczos(x: f64) -> f64 {
    // Valid for x >= 0.5.
    let series = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (k, &d)| s + d / (x + k as f64 - 1.0));
    series * TWO_SQRT_E_OVER_PI * ((x - 0.5 + LANCZOS_G) / E).powf(x - 0.5)
}

/// Euler's Gamma function for positive arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FracError::Domain(format!(
            "Gamma is only evaluated for positive finite arguments, got {x}"
        )));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection; keeps relative accuracy for Γ(1 − α/2) as α → 2.
        PI / ((PI * x).sin() * lanczos(1.0 - x))
    } else if x > 171.7 {
        f64::INFINITY
    } else {
        lanczos(x)
    }
}

fn check_order(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 2.0 {
        Ok(())
    } else {
        Err(FracError::Domain(format!(
            "{name} must lie in (0, 2), got {v}"
        )))
    }
}

/// `κ_α = 2^{1−α} Γ(1−α/2) / Γ(α/2)`.
pub fn kappa_alpha(p: FracParams) -> Result<f64> {
    kappa(p.alpha)
}

/// [`kappa_alpha`] taking the order directly.
pub fn kappa(alpha: f64) -> Result<f64> {
    check_order("alpha", alpha)?;
    Ok(2f64.powf(1.0 - alpha) * gamma_unchecked(1.0 - 0.5 * alpha) / gamma_unchecked(0.5 * alpha))
}

/// Coefficients of the profile expansions `φ_β(s) ≈ 1 − c₁ s^β` near zero and
/// `φ_β(s) ≈ c₂ s^{(β−1)/2} e^{−s}` at infinity.
pub fn c_constants(beta: f64) -> Result<(f64, f64)> {
    check_order("beta", beta)?;
    let g = gamma_unchecked(0.5 * beta);
    let c1 = 2f64.powf(1.0 - beta) * gamma_unchecked(1.0 - 0.5 * beta) / (beta * g);
    let c2 = 2f64.powf(0.5 * (1.0 - beta)) * PI.sqrt() / g;
    Ok((c1, c2))
}

/// Constants `b`, `d` and `ℓ = √(bd)` of the Hardy-Littlewood-Sobolev route
/// to the sharp trace inequality.
pub fn hls_constants(p: FracParams) -> Result<(f64, f64, f64)> {
    p.require_trace_range()?;
    let a = p.alpha;
    let n = p.n_dim as f64;
    let b = gamma_unchecked(0.5 * (n - a))
        / (2f64.powf(a) * PI.powf(0.5 * n) * gamma_unchecked(0.5 * a));
    let d = PI.powf(0.5 * (n - a)) * gamma_unchecked(0.5 * a) * gamma_unchecked(n).powf(a / n)
        / (gamma_unchecked(0.5 * (n + a)) * gamma_unchecked(0.5 * n).powf(a / n));
    Ok((b, d, (b * d).sqrt()))
}

/// Sharp constant `S(α, N)` of the trace inequality
/// `‖v‖²_{L^{2N/(N−α)}} ≤ S ∫ y^{1−α} |∇z|²`.
pub fn trace_constant(p: FracParams) -> Result<f64> {
    p.require_trace_range()?;
    let a = p.alpha;
    let n = p.n_dim as f64;
    let num =
        gamma_unchecked(0.5 * a) * gamma_unchecked(0.5 * (n - a)) * gamma_unchecked(n).powf(a / n);
    let den = 2.0
        * PI.powf(0.5 * a)
        * gamma_unchecked(1.0 - 0.5 * a)
        * gamma_unchecked(0.5 * (n + a))
        * gamma_unchecked(0.5 * n).powf(a / n);
    Ok(num / den)
}

/// Whether the pure power `s^p` is at or above the critical exponent, where
/// star-shaped domains admit no positive solution.
pub fn supercritical_nonexistence(p_exp: f64, par: FracParams) -> bool {
    p_exp >= par.critical_exponent()
}

/// Pohozaev integrand `(N−α) s f(s) − 2N F(s)` for the pure power `f(s) = s^p`.
pub fn pohozaev_integrand_power(s: f64, p_exp: f64, par: FracParams) -> f64 {
    let n = par.n_dim as f64;
    (n - par.alpha) * s * s.powf(p_exp) - 2.0 * n * s.powf(p_exp + 1.0) / (p_exp + 1.0)
}
