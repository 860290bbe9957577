use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{check_trace_field, CylinderGrid, ExtensionField};
use crate::error::{FracError, Result};
use crate::special::FracParams;
use crate::spectral::{synthesize_on, SpectralField};

/// Weighted five-point extension with a homogeneous cap at `y = Y`.
///
/// The discrete system is the Euler-Lagrange equation of
/// [`super::extension_energy`]: an M-matrix, diagonalised in `x` by the
/// discrete sine transform and solved row by row with the Thomas algorithm.
pub fn extend_fd(
    u: &SpectralField,
    p: FracParams,
    grid: &Arc<CylinderGrid>,
) -> Result<ExtensionField> {
    extend_fd_with_residual(u, p, grid).map(|(w, _)| w)
}

/// [`extend_fd`] together with the relative residual of the assembled scheme.
pub fn extend_fd_with_residual(
    u: &SpectralField,
    p: FracParams,
    grid: &Arc<CylinderGrid>,
) -> Result<(ExtensionField, f64)> {
    check_trace_field(u, grid)?;
    if (p.alpha - grid.alpha()).abs() > 1e-14 {
        return Err(FracError::Domain(
            "order does not match the grid weight".into(),
        ));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let hx = grid.hx();
    let trace = synthesize_on(u, nx).values;
    let dual: Vec<f64> = (0..=ny).map(|k| grid.dual_weight(k)).collect();
    let cond: Vec<f64> = (0..ny).map(|k| grid.face_conductance(k)).collect();

    let v = DMatrix::from_fn(nx, nx, |i, j| {
        (PI * ((i + 1) * (j + 1)) as f64 / (nx + 1) as f64).sin()
    });
    let scale = 2.0 / (nx + 1) as f64;
    let hat = v.tr_mul(&nalgebra::DVector::from_fn(nx, |i, _| trace[i + 1])) * scale;

    let mut w_hat = DMatrix::zeros(nx, ny + 1);
    let interior = ny - 1;
    let mut sub = vec![0.0; interior];
    let mut diag = vec![0.0; interior];
    let mut sup = vec![0.0; interior];
    let mut rhs = vec![0.0; interior];
    for j in 0..nx {
        let s = (0.5 * PI * (j + 1) as f64 / (nx + 1) as f64).sin();
        let mu = 4.0 * s * s;
        for r in 0..interior {
            let k = r + 1;
            diag[r] = dual[k] * mu / hx + hx * (cond[k - 1] + cond[k]);
            sub[r] = -hx * cond[k - 1];
            sup[r] = -hx * cond[k];
            rhs[r] = 0.0;
        }
        rhs[0] = hx * cond[0] * hat[j];
        thomas(&sub, &mut diag, &sup, &mut rhs);
        w_hat[(j, 0)] = hat[j];
        for r in 0..interior {
            w_hat[(j, r + 1)] = rhs[r];
        }
    }
    let w_int = &v * w_hat;
    let mut out = ExtensionField::zeros(grid);
    for i in 0..nx {
        for k in 0..ny {
            *out.at_mut(i + 1, k) = w_int[(i, k)];
        }
    }
    for i in 1..=nx {
        *out.at_mut(i, 0) = trace[i];
    }

    let mut res: f64 = 0.0;
    let mut size: f64 = 0.0;
    for i in 1..=nx {
        for k in 1..ny {
            let c = out.at(i, k);
            let d = dual[k] / hx * (2.0 * c - out.at(i - 1, k) - out.at(i + 1, k))
                + hx * (cond[k - 1] * (c - out.at(i, k - 1)) + cond[k] * (c - out.at(i, k + 1)));
            res = res.max(d.abs());
            size = size.max((dual[k] / hx + hx * (cond[k - 1] + cond[k])) * c.abs());
        }
    }
    let rel = if size > 0.0 { res / size } else { 0.0 };
    if rel > 1e-9 {
        return Err(FracError::IterationFailure {
            method: "extension solve",
            iterations: 1,
            residual: rel,
        });
    }
    Ok((out, rel))
}

/// In-place tridiagonal solve; the solution overwrites `rhs`.
fn thomas(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for r in 1..n {
        let m = sub[r] / diag[r - 1];
        diag[r] -= m * sup[r - 1];
        rhs[r] -= m * rhs[r - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for r in (0..n - 1).rev() {
        rhs[r] = (rhs[r] - sup[r] * rhs[r + 1]) / diag[r];
    }
}
