//! Quadrature rules shared by the profile, trace and extension code.

use std::f64::consts::PI;

use crate::error::{FracError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, started at the Chebyshev-like guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh rule on `[a, b]`.
///
/// The integrand receives the offset from `a` rather than the abscissa so that
/// callers with an endpoint singularity at `a` can evaluate it without
/// cancellation. Nodes whose offset underflows are skipped.
pub fn tanh_sinh<F>(a: f64, b: f64, rel_tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let width = b - a;
    if width <= 0.0 {
        return Ok(0.0);
    }
    let min_gap = 1e-290 * width;
    let t_max = 6.5;
    let mut h = 0.5;
    // Level-0 sum uses every node k*h; refinements add the odd multiples.
    let mut sum = 0.0;
    let eval = |t: f64, f: &mut F| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let cosh_u = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cosh_u * cosh_u);
        // Distance to the nearer endpoint, computed without cancellation.
        let e = (-2.0 * u.abs()).exp();
        let near = width * e / (1.0 + e);
        if near < min_gap {
            return 0.0;
        }
        let offset = if u <= 0.0 { near } else { width - near };
        0.5 * width * w * f(offset)
    };
    let n0 = (t_max / h) as i64;
    for k in -n0..=n0 {
        sum += eval(k as f64 * h, &mut f);
    }
    let mut estimate = sum * h;
    for _level in 0..9 {
        h *= 0.5;
        let n = (t_max / h) as i64;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            sum += eval(k as f64 * h, &mut f);
            k += 2;
        }
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= rel_tol * next.abs().max(1e-300) {
            return Ok(estimate);
        }
    }
    Err(FracError::DivergentIntegral(format!(
        "tanh-sinh on [{a}, {b}] did not settle (last estimate {estimate:.6e})"
    )))
}

/// Fourier cosine integral `\int_0^\infty f(x) cos(omega x) dx` for `omega > 0`.
///
/// Double-exponential transform of Ooura and Mori with mesh `h`; the nodes
/// approach the zeros of the cosine double-exponentially, which makes the rule
/// accurate for integrands decaying only algebraically.
pub fn fourier_cosine<F>(omega: f64, h: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(omega > 0.0);
    let m = PI / h;
    let beta = 0.25;
    let alpha = beta / (1.0 + m * (1.0 + m).ln() / (4.0 * PI)).sqrt();
    let mut total = 0.0;
    // t_n = (n - 1/2) h so that m * phi(t_n) -> (n - 1/2) pi.
    let mut term = |n: i64| -> f64 {
        let t = (n as f64 - 0.5) * h;
        let (phi, dphi) = de_map(t, alpha, beta);
        if dphi == 0.0 || !dphi.is_finite() {
            return 0.0;
        }
        let x = m * phi / omega;
        f(x) * (m * phi).cos() * dphi
    };
    let n_max = (7.0 / h).ceil() as i64;
    for n in (-n_max + 1)..=n_max {
        total += term(n);
    }
    total * m * h / omega
}

fn de_map(t: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let g = 2.0 * t + alpha * (1.0 - (-t).exp()) + beta * (t.exp() - 1.0);
    let dg = 2.0 + alpha * (-t).exp() + beta * t.exp();
    if g < -700.0 {
        return (0.0, 0.0);
    }
    let e = (-g).exp();
    let denom = -(-g).exp_m1();
    let phi = t / denom;
    let dphi = 1.0 / denom - t * dg * e / (denom * denom);
    (phi, dphi)
}

/// Composite Gauss-Legendre over `[a, b]` with `panels` equal panels.
pub fn composite_gl<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * w;
            rule.integrate(lo, lo + w, &mut f)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(6);
        // Degree 11 is the highest exact degree for 6 nodes.
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // \int_0^1 x^{-0.7} dx = 1/0.3
        let v = tanh_sinh(0.0, 1.0, 1e-12, |d| d.powf(-0.7)).unwrap();
        assert!((v - 1.0 / 0.3).abs() < 1e-6, "{v}");
        let v = tanh_sinh(0.0, 1.0, 1e-13, |d| (1.0 + d).ln()).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn fourier_cosine_of_lorentzian() {
        // \int_0^\infty cos(w x)/(1+x^2) dx = (pi/2) e^{-w}
        for &w in &[0.3, 1.0, 4.0] {
            let v = fourier_cosine(w, 0.05, |x| 1.0 / (1.0 + x * x));
            let exact = 0.5 * PI * (-w).exp();
            assert!((v - exact).abs() < 1e-9, "w={w}: {v} vs {exact}");
        }
    }

    #[test]
    fn fourier_cosine_of_slow_algebraic_decay() {
        // \int_0^\infty x^{-1/2} cos(w x) dx = sqrt(pi / (2 w))
        let w = 0.7;
        let v = fourier_cosine(w, 0.05, |x| x.powf(-0.5));
        let exact = (PI / (2.0 * w)).sqrt();
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }
}
