use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{AxisTable, DomainSpec, Eigenbasis};
use crate::error::{FracError, Result};
use crate::special::FracParams;

/// Function represented by its coefficients in the Dirichlet eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub basis: Arc<Eigenbasis>,
    pub coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(basis: &Arc<Eigenbasis>) -> Self {
        Self {
            basis: Arc::clone(basis),
            coeffs: vec![0.0; basis.len()],
        }
    }

    pub fn from_coeffs(basis: &Arc<Eigenbasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(FracError::ShapeMismatch {
                expected: format!("{} coefficients", basis.len()),
                found: format!("{}", coeffs.len()),
            });
        }
        Ok(Self {
            basis: Arc::clone(basis),
            coeffs,
        })
    }

    /// `c · φ_idx` for the mode at flattened position `idx`.
    pub fn mode(basis: &Arc<Eigenbasis>, idx: usize, c: f64) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[idx] = c;
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `L²(Ω)` inner product, exact by orthonormality.
    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_coeffs(|_, a| c * a)
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + c * b)
            .collect();
        Self {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn map_coeffs<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, &a)| f(j, a))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Share of `Σ a_j² λ_j^{α/2}` carried by the upper half of the spectrum.
    pub fn tail_fraction(&self, p: FracParams) -> f64 {
        let half = self.len() / 2;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (j, (&a, &ev)) in self.coeffs.iter().zip(&self.basis.eigenvalues).enumerate() {
            let t = a * a * ev.powf(0.5 * p.alpha);
            total += t;
            if j >= half {
                tail += t;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

/// Samples on the closed tensor collocation grid, boundary nodes included.
///
/// `shape[a]` is the number of interior nodes along axis `a`; values are
/// stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub domain: DomainSpec,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(domain: &DomainSpec, interior: usize) -> Self {
        let shape = vec![interior; domain.dim()];
        let total: usize = shape.iter().map(|n| n + 2).product();
        Self {
            domain: domain.clone(),
            shape,
            values: vec![0.0; total],
        }
    }

    /// Sample `f` at every grid node.
    pub fn sample<F: Fn(&[f64]) -> f64>(domain: &DomainSpec, interior: usize, f: F) -> Self {
        let mut g = Self::zeros(domain, interior);
        let axes: Vec<Vec<f64>> = (0..domain.dim()).map(|a| g.nodes(a)).collect();
        if axes.len() == 1 {
            for (v, &x) in g.values.iter_mut().zip(&axes[0]) {
                *v = f(&[x]);
            }
        } else {
            let ny = axes[1].len();
            for (idx, v) in g.values.iter_mut().enumerate() {
                *v = f(&[axes[0][idx / ny], axes[1][idx % ny]]);
            }
        }
        g
    }

    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        let h = self.domain.lengths[axis] / (n + 1) as f64;
        let o = self.domain.offset(axis);
        (0..n + 2).map(|i| o + i as f64 * h).collect()
    }

    pub fn weights(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        let h = self.domain.lengths[axis] / (n + 1) as f64;
        let mut w = vec![h; n + 2];
        w[0] *= 0.5;
        w[n + 1] *= 0.5;
        w
    }

    /// Tensor trapezoid weights aligned with `values`.
    pub fn tensor_weights(&self) -> Vec<f64> {
        let w0 = self.weights(0);
        if self.shape.len() == 1 {
            return w0;
        }
        let w1 = self.weights(1);
        w0.iter()
            .flat_map(|a| w1.iter().map(move |b| a * b))
            .collect()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            domain: self.domain.clone(),
            shape: self.shape.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn integrate(&self) -> f64 {
        self.tensor_weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_grid(g: &GridField, basis: &Eigenbasis) -> Result<usize> {
    if g.domain.kind != basis.domain.kind || g.domain.lengths != basis.domain.lengths {
        return Err(FracError::ShapeMismatch {
            expected: format!("{:?}", basis.domain),
            found: format!("{:?}", g.domain),
        });
    }
    let n = g.shape[0];
    let expected_len: usize = g.shape.iter().map(|n| n + 2).product();
    if g.shape.iter().any(|&s| s != n) || g.values.len() != expected_len || n < basis.mode_count {
        return Err(FracError::ShapeMismatch {
            expected: format!(
                "square grid with at least {} interior nodes per axis",
                basis.mode_count
            ),
            found: format!("shape {:?} with {} values", g.shape, g.values.len()),
        });
    }
    Ok(n)
}

/// Discrete sine transform onto the basis coefficients.
///
/// Exact for fields in the span of the basis whenever the grid has at least
/// as many interior nodes as modes per axis.
pub fn analyze(g: &GridField, basis: &Arc<Eigenbasis>) -> Result<SpectralField> {
    let n = check_grid(g, basis)?;
    let tables = basis.tables_for(n);
    let coeffs = analyze_with(&tables, basis, &g.values);
    Ok(SpectralField {
        basis: Arc::clone(basis),
        coeffs,
    })
}

pub(crate) fn analyze_with(tables: &[AxisTable], basis: &Eigenbasis, values: &[f64]) -> Vec<f64> {
    if tables.len() == 1 {
        let t = &tables[0];
        let wg = DVector::from_iterator(
            values.len(),
            values.iter().zip(&t.weights).map(|(v, w)| v * w),
        );
        let a = t.sines.tr_mul(&wg);
        let mut out = vec![0.0; basis.len()];
        for j in 0..basis.mode_count {
            out[basis.position(j + 1, 0)] = a[j];
        }
        out
    } else {
        let (t0, t1) = (&tables[0], &tables[1]);
        let (r, c) = (t0.nodes.len(), t1.nodes.len());
        let g = DMatrix::from_fn(r, c, |i, l| {
            values[i * c + l] * t0.weights[i] * t1.weights[l]
        });
        let a = t0.sines.tr_mul(&g) * &t1.sines;
        basis.from_matrix(&a)
    }
}

pub(crate) fn synthesize_with(
    tables: &[AxisTable],
    basis: &Eigenbasis,
    coeffs: &[f64],
) -> Vec<f64> {
    if tables.len() == 1 {
        let t = &tables[0];
        let a = DVector::from_fn(basis.mode_count, |j, _| coeffs[basis.position(j + 1, 0)]);
        (&t.sines * a).iter().copied().collect()
    } else {
        let (t0, t1) = (&tables[0], &tables[1]);
        let a = basis.to_matrix(coeffs);
        let g = &t0.sines * a * t1.sines.transpose();
        let c = t1.nodes.len();
        let mut out = vec![0.0; t0.nodes.len() * c];
        for i in 0..t0.nodes.len() {
            for l in 0..c {
                out[i * c + l] = g[(i, l)];
            }
        }
        out
    }
}

/// Values of `u` on the default collocation grid.
pub fn synthesize(u: &SpectralField) -> GridField {
    synthesize_on(u, u.basis.grid_size())
}

/// Values of `u` on a grid with `interior` nodes per axis.
pub fn synthesize_on(u: &SpectralField, interior: usize) -> GridField {
    let tables = u.basis.tables_for(interior);
    let mut g = GridField::zeros(&u.basis.domain, interior);
    g.values = synthesize_with(&tables, &u.basis, &u.coeffs);
    g
}

/// Multiply coefficient `a_j` by `λ_j^{order/2}` for any real order.
pub fn apply_power(u: &SpectralField, order: f64) -> SpectralField {
    let ev = &u.basis.eigenvalues;
    u.map_coeffs(|j, a| a * ev[j].powf(0.5 * order))
}

/// `(−Δ)^{α/2} u`.
pub fn apply_fractional(u: &SpectralField, p: FracParams) -> SpectralField {
    apply_power(u, p.alpha)
}

/// Solve `(−Δ)^{α/2} u = g` with homogeneous Dirichlet data.
pub fn solve_linear(g: &SpectralField, p: FracParams) -> SpectralField {
    apply_power(g, -p.alpha)
}

/// `(Σ a_j² λ_j^{α/2})^{1/2}`.
pub fn hs_norm(u: &SpectralField, p: FracParams) -> f64 {
    u.coeffs
        .iter()
        .zip(&u.basis.eigenvalues)
        .map(|(a, ev)| a * a * ev.powf(0.5 * p.alpha))
        .sum::<f64>()
        .sqrt()
}

/// Quadrature `L^r` norm; `r = ∞` gives the largest absolute grid value.
pub fn lp_norm(g: &GridField, r: f64) -> Result<f64> {
    if r.is_infinite() && r > 0.0 {
        return Ok(g.max_abs());
    }
    if !(r >= 1.0) {
        return Err(FracError::Domain(format!("L^r norm needs r >= 1, got {r}")));
    }
    let s: f64 = g
        .tensor_weights()
        .iter()
        .zip(&g.values)
        .map(|(w, v)| w * v.abs().powf(r))
        .sum();
    Ok(s.powf(1.0 / r))
}
