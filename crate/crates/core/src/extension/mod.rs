//! Half-cylinder realisation of the fractional Laplacian.
//!
//! A trace `u` on an interval is extended to `Ω × (0, Y)` either mode by mode
//! with the profile `ψ(√λ_j y)` or by a weighted five-point scheme for
//! `−div(y^{1−α} ∇w) = 0`. The weighted normal derivative at `y = 0` then
//! recovers `(−Δ)^{α/2} u` independently of the spectral multiplier.

mod fd;

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FracError, Result};
use crate::special::{kappa, solve_profile, ExtensionProfile, FracParams};
use crate::spectral::{
    apply_fractional, synthesize_on, DomainKind, DomainSpec, GridField, SpectralField,
};

pub use fd::{extend_fd, extend_fd_with_residual};

/// Tensor grid on `Ω × [0, Y]` graded toward `y = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct CylinderGrid {
    pub base: DomainSpec,
    /// `nx + 2` nodes including both lateral boundary columns.
    pub x_nodes: Vec<f64>,
    /// `y_k = Y (k/K)^γ`, `k = 0..=K`; the last row carries the Dirichlet cap.
    pub y_nodes: Vec<f64>,
    pub weight_exponent: f64,
    pub grading: f64,
    pub y_max: f64,
}

impl CylinderGrid {
    /// Grid with `nx` interior columns and `ny` cells in `y`.
    ///
    /// `y_max` defaults to `8/√λ₁` and may not be shorter than `5/√λ₁`.
    pub fn new(
        base: &DomainSpec,
        nx: usize,
        ny: usize,
        alpha: f64,
        y_max: Option<f64>,
    ) -> Result<Self> {
        base.validate()?;
        if base.kind != DomainKind::Interval {
            return Err(FracError::Domain(
                "the cylinder oracle needs an interval base".into(),
            ));
        }
        FracParams::new(alpha, 1)?;
        if nx < 2 || ny < 4 {
            return Err(FracError::Domain(format!(
                "cylinder grid too coarse: nx = {nx}, ny = {ny}"
            )));
        }
        let l = base.lengths[0];
        let decay = l / std::f64::consts::PI;
        let y_max = y_max.unwrap_or(8.0 * decay);
        if y_max < 5.0 * decay {
            return Err(FracError::Domain(format!(
                "y_max = {y_max} below the decay length bound {}",
                5.0 * decay
            )));
        }
        let grading = (2.0f64).max(2.0 / alpha);
        let h = l / (nx + 1) as f64;
        let o = base.offset(0);
        let x_nodes = (0..nx + 2).map(|i| o + i as f64 * h).collect();
        let y_nodes = (0..=ny)
            .map(|k| y_max * (k as f64 / ny as f64).powf(grading))
            .collect();
        Ok(Self {
            base: base.clone(),
            x_nodes,
            y_nodes,
            weight_exponent: 1.0 - alpha,
            grading,
            y_max,
        })
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.weight_exponent
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len() - 2
    }

    pub fn ny(&self) -> usize {
        self.y_nodes.len() - 1
    }

    pub fn hx(&self) -> f64 {
        self.x_nodes[1] - self.x_nodes[0]
    }

    /// `∫ y^{1−α}` over the dual cell of row `k`.
    pub(crate) fn dual_weight(&self, k: usize) -> f64 {
        let y = &self.y_nodes;
        let lo = if k == 0 { 0.0 } else { 0.5 * (y[k - 1] + y[k]) };
        let hi = if k == self.ny() {
            y[k]
        } else {
            0.5 * (y[k] + y[k + 1])
        };
        let e = 2.0 - self.alpha();
        (hi.powf(e) - lo.powf(e)) / e
    }

    /// Conductance `1/∫ y^{α−1}` of the vertical face between rows `k` and `k+1`.
    pub(crate) fn face_conductance(&self, k: usize) -> f64 {
        let a = self.alpha();
        a / (self.y_nodes[k + 1].powf(a) - self.y_nodes[k].powf(a))
    }
}

/// Nodal values `w(x_i, y_k)`, stored with `k` fastest.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub grid: Arc<CylinderGrid>,
    pub values: Vec<f64>,
}

impl ExtensionField {
    pub fn zeros(grid: &Arc<CylinderGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.x_nodes.len() * grid.y_nodes.len()],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.grid.y_nodes.len() + k]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, k: usize) -> &mut f64 {
        let ny1 = self.grid.y_nodes.len();
        &mut self.values[i * ny1 + k]
    }

    /// Row `y = 0`.
    pub fn trace(&self) -> Vec<f64> {
        (0..self.grid.x_nodes.len())
            .map(|i| self.at(i, 0))
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Write `x,y,w` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "w"])?;
        for (i, x) in self.grid.x_nodes.iter().enumerate() {
            for (k, y) in self.grid.y_nodes.iter().enumerate() {
                w.write_record([
                    format!("{x:e}"),
                    format!("{y:e}"),
                    format!("{:e}", self.at(i, k)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_trace_field(u: &SpectralField, grid: &CylinderGrid) -> Result<()> {
    let d = &u.basis.domain;
    if d.kind != DomainKind::Interval || d.lengths != grid.base.lengths {
        return Err(FracError::ShapeMismatch {
            expected: format!("interval field on {:?}", grid.base.lengths),
            found: format!("{:?} on {:?}", d.kind, d.lengths),
        });
    }
    Ok(())
}

/// Profile used by [`extend_spectral`] for order `α`.
pub fn extension_profile(alpha: f64) -> Result<ExtensionProfile> {
    solve_profile(alpha, 40.0, 1e-8)
}

/// `w(x, y) = Σ a_j φ_j(x) ψ(√λ_j y)` with `ψ = φ_α`.
pub fn extend_spectral(
    u: &SpectralField,
    p: FracParams,
    grid: &Arc<CylinderGrid>,
) -> Result<ExtensionField> {
    let profile = extension_profile(p.alpha)?;
    extend_spectral_with(u, &profile, grid)
}

/// [`extend_spectral`] with a precomputed profile.
pub fn extend_spectral_with(
    u: &SpectralField,
    profile: &ExtensionProfile,
    grid: &Arc<CylinderGrid>,
) -> Result<ExtensionField> {
    check_trace_field(u, grid)?;
    if (profile.beta - grid.alpha()).abs() > 1e-14 {
        return Err(FracError::Domain(format!(
            "profile order {} does not match grid order {}",
            profile.beta,
            grid.alpha()
        )));
    }
    let basis = &u.basis;
    let reach = basis.first_eigenvalue().sqrt() * grid.y_max;
    if reach > profile.coverage() {
        return Err(FracError::Truncation(format!(
            "slowest mode needs the profile up to s = {reach:.2}, table ends at {}",
            profile.coverage()
        )));
    }
    let nx = grid.nx();
    let phi = synthesize_on_modes(u, nx);
    let mut psi = DMatrix::zeros(basis.len(), grid.y_nodes.len());
    for j in 0..basis.len() {
        let r = basis.eigenvalues[j].sqrt();
        let s: Vec<f64> = grid.y_nodes.iter().map(|y| r * y).collect();
        for (k, (v, _)) in profile.eval_many(&s).into_iter().enumerate() {
            psi[(j, k)] = u.coeffs[j] * v;
        }
    }
    let w = phi * psi;
    let mut out = ExtensionField::zeros(grid);
    let ny1 = grid.y_nodes.len();
    for i in 0..nx + 2 {
        for k in 0..ny1 {
            out.values[i * ny1 + k] = w[(i, k)];
        }
    }
    // The truncated cylinder carries a homogeneous cap.
    for i in 0..nx + 2 {
        out.values[i * ny1 + ny1 - 1] = 0.0;
    }
    Ok(out)
}

/// `(nx+2) × M` table of eigenfunction values on the cylinder columns.
fn synthesize_on_modes(u: &SpectralField, nx: usize) -> DMatrix<f64> {
    let tables = u.basis.tables_for(nx);
    let t = &tables[0];
    let b = &u.basis;
    DMatrix::from_fn(nx + 2, b.len(), |i, j| t.sines[(i, b.modes[j][0] - 1)])
}

/// Discrete weighted Dirichlet energy `∫∫ y^{1−α} |∇w|²`.
///
/// Horizontal differences are weighted by the exact integral of `y^{1−α}`
/// over dual cells, vertical ones by the face conductances of the scheme, so
/// the finite-difference extension is exactly the minimiser of this form.
pub fn extension_energy(w: &ExtensionField, _p: FracParams) -> f64 {
    let g = &w.grid;
    let (nx, ny) = (g.nx(), g.ny());
    let hx = g.hx();
    let dual: Vec<f64> = (0..=ny).map(|k| g.dual_weight(k)).collect();
    let cond: Vec<f64> = (0..ny).map(|k| g.face_conductance(k)).collect();
    let mut e = 0.0;
    for i in 0..=nx {
        for (k, dk) in dual.iter().enumerate() {
            let d = w.at(i + 1, k) - w.at(i, k);
            e += d * d * dk / hx;
        }
    }
    for i in 1..=nx {
        for (k, ck) in cond.iter().enumerate() {
            let d = w.at(i, k + 1) - w.at(i, k);
            e += hx * ck * d * d;
        }
    }
    e
}

/// How the weighted normal derivative at `y = 0` is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    /// Interpolate `w − w(·,0)` by `y^α`, `y²`, `y^{2+α}` on the first three layers.
    #[default]
    Fit,
    /// Discrete Dirichlet-to-Neumann map of the scheme (`∂E_h/∂w_{i,0}`).
    Flux,
}

/// `−(1/κ_α) lim y^{1−α} ∂_y w` on the columns of the grid.
pub fn neumann_trace(w: &ExtensionField, p: FracParams) -> Result<GridField> {
    neumann_trace_with(w, p, TraceMethod::Fit)
}

pub fn neumann_trace_with(
    w: &ExtensionField,
    p: FracParams,
    method: TraceMethod,
) -> Result<GridField> {
    let g = &w.grid;
    let a = p.alpha;
    if (a - g.alpha()).abs() > 1e-14 {
        return Err(FracError::Domain(
            "order does not match the grid weight".into(),
        ));
    }
    let k_alpha = kappa(a)?;
    let nx = g.nx();
    let y = &g.y_nodes;
    if g.ny() < 8 || y[3] > 0.05 * g.y_max {
        return Err(FracError::Truncation(format!(
            "need at least three layers in the boundary layer, y_3 = {:.3e} of Y = {:.3e}",
            y[3], g.y_max
        )));
    }
    let mut out = GridField::zeros(&g.base, nx);
    match method {
        TraceMethod::Fit => {
            let basis = |t: f64| [t.powf(a), t * t, t * t * t.powf(a)];
            let m = nalgebra::Matrix3::from_fn(|r, c| basis(y[r + 1])[c]);
            let lu = m.lu();
            for i in 1..=nx {
                let rhs = nalgebra::Vector3::from_fn(|r, _| w.at(i, r + 1) - w.at(i, 0));
                let sol = lu
                    .solve(&rhs)
                    .ok_or_else(|| FracError::LinearAlgebra("singular trace fit".into()))?;
                out.values[i] = -a * sol[0] / k_alpha;
            }
        }
        TraceMethod::Flux => {
            let hx = g.hx();
            let m0 = g.dual_weight(0);
            let c0 = g.face_conductance(0);
            for i in 1..=nx {
                let lap = (2.0 * w.at(i, 0) - w.at(i - 1, 0) - w.at(i + 1, 0)) / (hx * hx);
                out.values[i] = (m0 * lap + c0 * (w.at(i, 0) - w.at(i, 1))) / k_alpha;
            }
        }
    }
    Ok(out)
}

/// Relative discrete `L²` distance between two fields on the same grid.
pub fn relative_l2(a: &GridField, b: &GridField) -> f64 {
    let w = a.tensor_weights();
    let (mut num, mut den) = (0.0, 0.0);
    for ((wi, x), y) in w.iter().zip(&a.values).zip(&b.values) {
        num += wi * (x - y) * (x - y);
        den += wi * y * y;
    }
    (num / den).sqrt()
}

/// One refinement level of the two-route comparison.
#[derive(Debug, Clone, Serialize)]
pub struct StudyLevel {
    pub nx: usize,
    pub ny: usize,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub method: TraceMethod,
    pub levels: Vec<StudyLevel>,
    /// `log2(e_k / e_{k+1})` between successive levels.
    pub orders: Vec<f64>,
}

/// Compare `neumann_trace(extend_fd(u))` with `apply_fractional(u)` on a
/// sequence of `(nx, ny)` grids.
pub fn convergence_study(
    u: &SpectralField,
    p: FracParams,
    levels: &[(usize, usize)],
    method: TraceMethod,
) -> Result<ConvergenceReport> {
    let exact = apply_fractional(u, p);
    let mut out = Vec::with_capacity(levels.len());
    for &(nx, ny) in levels {
        let grid = Arc::new(CylinderGrid::new(&u.basis.domain, nx, ny, p.alpha, None)?);
        let w = extend_fd(u, p, &grid)?;
        let nt = neumann_trace_with(&w, p, method)?;
        let reference = synthesize_on(&exact, nx);
        out.push(StudyLevel {
            nx,
            ny,
            relative_error: relative_l2(&nt, &reference),
        });
    }
    let orders = out
        .windows(2)
        .map(|w| {
            let refine = (w[1].nx + 1) as f64 / (w[0].nx + 1) as f64;
            (w[0].relative_error / w[1].relative_error).ln() / refine.ln()
        })
        .collect();
    Ok(ConvergenceReport {
        alpha: p.alpha,
        method,
        levels: out,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_basis;
    use std::f64::consts::PI;

    #[test]
    fn exponential_extension_of_first_mode() {
        let b = build_basis(DomainSpec::interval(PI), 4).unwrap();
        let u = SpectralField::mode(&b, 0, 1.0);
        let p = FracParams::new(1.0, 1).unwrap();
        let grid = Arc::new(CylinderGrid::new(&b.domain, 31, 40, 1.0, None).unwrap());
        let w = extend_spectral(&u, p, &grid).unwrap();
        for (i, x) in grid.x_nodes.iter().enumerate() {
            for (k, y) in grid.y_nodes.iter().enumerate().take(grid.ny()) {
                let e = (2.0 / PI).sqrt() * x.sin() * (-y).exp();
                assert!((w.at(i, k) - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_trace_gives_zero_field() {
        let b = build_basis(DomainSpec::interval(1.0), 4).unwrap();
        let p = FracParams::new(0.5, 1).unwrap();
        let grid = Arc::new(CylinderGrid::new(&b.domain, 15, 20, 0.5, None).unwrap());
        let u = SpectralField::zeros(&b);
        assert!(extend_spectral(&u, p, &grid)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
        assert!(extend_fd(&u, p, &grid)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn short_cylinder_is_rejected() {
        let d = DomainSpec::interval(1.0);
        assert!(CylinderGrid::new(&d, 15, 20, 0.5, Some(1.0)).is_err());
        assert!(CylinderGrid::new(&DomainSpec::rectangle(1.0, 1.0), 15, 20, 0.5, None).is_err());
    }
}
