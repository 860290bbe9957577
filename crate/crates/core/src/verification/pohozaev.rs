use std::sync::Arc;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::extension::{extend_fd, CylinderGrid};
use crate::semilinear::{nonlinearity, primitive, ProblemParams};
use crate::special::kappa;
use crate::spectral::{synthesize, SpectralField};

/// Terms of the Pohozaev balance for the extension of `u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PohozaevTerms {
    /// `½ ∮ y^{1−α} ⟨(x,y),ν⟩ |∇w|²` over the lateral sides and the cap, divided by κ_α.
    pub boundary: f64,
    pub integral_big_f: f64,
    pub integral_u_f: f64,
    pub defect: f64,
}

/// Signed defect `(1/κ_α) ½∮ y^{1−α}⟨(x,y),ν⟩|∇w|² − N∫F(u) + ((N−α)/2)∫u f(u)`
/// with `w = extend_fd(u)`; it vanishes for exact solutions.
///
/// `u` must live on an interval centred at the origin.
pub fn pohozaev_defect(
    u: &SpectralField,
    pp: &ProblemParams,
    grid: &Arc<CylinderGrid>,
) -> Result<PohozaevTerms> {
    let dom = &u.basis.domain;
    let l = dom.lengths[0];
    let centred = |o: f64| (o + 0.5 * l).abs() <= 1e-12 * l;
    if dom.dim() != 1 || !centred(dom.offset(0)) || !centred(grid.base.offset(0)) {
        return Err(FracError::Domain(
            "Pohozaev defect needs an interval centred at the origin".into(),
        ));
    }
    let a = pp.frac.alpha;
    let w = extend_fd(u, pp.frac, grid)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.hx();

    // Lateral sides: w = 0, so |∇w| = |∂_x w| and ⟨(x,y),ν⟩ = L/2.
    let mut lateral = 0.0;
    for k in 0..ny {
        let left = (4.0 * w.at(1, k) - w.at(2, k) - 3.0 * w.at(0, k)) / (2.0 * h);
        let right = (4.0 * w.at(nx, k) - w.at(nx - 1, k) - 3.0 * w.at(nx + 1, k)) / (2.0 * h);
        lateral += grid.dual_weight(k) * (left * left + right * right);
    }
    lateral *= 0.25 * l;

    // Cap y = Y: w = 0, so |∇w| = |∂_y w| and ⟨(x,y),ν⟩ = Y.
    let y = &grid.y_nodes;
    let (y0, d1, d2) = (y[ny], y[ny - 1] - y[ny], y[ny - 2] - y[ny]);
    let mut cap = 0.0;
    for i in 1..=nx {
        let (w0, w1, w2) = (w.at(i, ny), w.at(i, ny - 1), w.at(i, ny - 2));
        let wy = (w1 * d2 * d2 - w2 * d1 * d1 - w0 * (d2 * d2 - d1 * d1)) / (d1 * d2 * (d2 - d1));
        cap += h * wy * wy;
    }
    cap *= 0.5 * y0 * y0.powf(1.0 - a);

    let g = synthesize(u);
    let wts = g.tensor_weights();
    let big_f: f64 = g
        .values
        .iter()
        .zip(&wts)
        .map(|(&s, w)| w * primitive(s, pp))
        .sum();
    let uf: f64 = g
        .values
        .iter()
        .zip(&wts)
        .map(|(&s, w)| w * s * nonlinearity(s, pp))
        .sum();
    let boundary = (lateral + cap) / kappa(a)?;
    let n = 1.0;
    Ok(PohozaevTerms {
        boundary,
        integral_big_f: big_f,
        integral_u_f: uf,
        defect: boundary - n * big_f + 0.5 * (n - a) * uf,
    })
}
