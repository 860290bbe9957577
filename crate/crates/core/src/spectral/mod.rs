//! Dirichlet eigenbasis of intervals and rectangles and the spectral
//! fractional Laplacian acting diagonally on it.

pub(crate) mod field;
pub mod io;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

pub use field::{
    analyze, apply_fractional, apply_power, hs_norm, lp_norm, solve_linear, synthesize,
    synthesize_on, GridField, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Rectangle,
}

/// Tensor-product domain `∏ (o_i, o_i + L_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub origin_offset: Vec<f64>,
}

impl DomainSpec {
    pub fn interval(length: f64) -> Self {
        Self {
            kind: DomainKind::Interval,
            lengths: vec![length],
            origin_offset: vec![0.0],
        }
    }

    pub fn rectangle(l1: f64, l2: f64) -> Self {
        Self {
            kind: DomainKind::Rectangle,
            lengths: vec![l1, l2],
            origin_offset: vec![0.0, 0.0],
        }
    }

    /// Same domain translated so that its centre sits at the origin.
    pub fn centered(&self) -> Self {
        Self {
            kind: self.kind,
            lengths: self.lengths.clone(),
            origin_offset: self.lengths.iter().map(|l| -0.5 * l).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }

    pub fn offset(&self, axis: usize) -> f64 {
        self.origin_offset.get(axis).copied().unwrap_or(0.0)
    }

    pub fn measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.len() != self.dim() {
            return Err(FracError::Domain(format!(
                "{:?} needs {} length(s), got {}",
                self.kind,
                self.dim(),
                self.lengths.len()
            )));
        }
        if self.lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(FracError::Domain("domain lengths must be positive".into()));
        }
        if !self.origin_offset.is_empty() && self.origin_offset.len() != self.dim() {
            return Err(FracError::Domain(
                "origin_offset arity does not match domain".into(),
            ));
        }
        Ok(())
    }
}

/// Sine table for one axis on the closed collocation grid.
///
/// `n` interior nodes `x_i = o + iL/(n+1)` plus the two boundary nodes;
/// interior weight `L/(n+1)`, boundary weight half that.
#[derive(Debug, Clone)]
pub struct AxisTable {
    pub interior: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `(n+2) × M` matrix of `√(2/L) sin(jπ(x−o)/L)`.
    pub sines: DMatrix<f64>,
}

impl AxisTable {
    fn new(length: f64, offset: f64, modes: usize, interior: usize) -> Self {
        let h = length / (interior + 1) as f64;
        let nodes: Vec<f64> = (0..interior + 2).map(|i| offset + i as f64 * h).collect();
        let mut weights = vec![h; interior + 2];
        weights[0] *= 0.5;
        weights[interior + 1] *= 0.5;
        let scale = (2.0 / length).sqrt();
        let sines = DMatrix::from_fn(interior + 2, modes, |i, j| {
            if i == 0 || i == interior + 1 {
                0.0
            } else {
                let arg = PI * ((j + 1) * i) as f64 / (interior + 1) as f64;
                scale * arg.sin()
            }
        });
        Self {
            interior,
            nodes,
            weights,
            sines,
        }
    }
}

/// Closed-form Dirichlet eigenpairs, flattened in order of increasing
/// eigenvalue with ties broken by the lexicographic order of `(j, k)`.
#[derive(Debug)]
pub struct Eigenbasis {
    pub domain: DomainSpec,
    pub mode_count: usize,
    pub eigenvalues: Vec<f64>,
    /// One-based mode indices; the second entry is 0 on an interval.
    pub modes: Vec<[usize; 2]>,
    /// Flattened position of mode `(j, k)` at `j_k_index[(j-1) * M + (k-1)]`.
    j_k_index: Vec<usize>,
    tables: Vec<AxisTable>,
}

/// Build the eigenbasis with `modes_per_axis` modes along every axis.
///
/// The default collocation grid has `2M + 1` interior nodes per axis, enough
/// to integrate quadratic products of resolved modes exactly.
pub fn build_basis(domain: DomainSpec, modes_per_axis: usize) -> Result<Arc<Eigenbasis>> {
    domain.validate()?;
    if modes_per_axis == 0 {
        return Err(FracError::Domain("need at least one mode per axis".into()));
    }
    let m = modes_per_axis;
    let axis_ev = |axis: usize, j: usize| (j as f64 * PI / domain.lengths[axis]).powi(2);
    let mut modes: Vec<[usize; 2]> = match domain.kind {
        DomainKind::Interval => (1..=m).map(|j| [j, 0]).collect(),
        DomainKind::Rectangle => (1..=m).flat_map(|j| (1..=m).map(move |k| [j, k])).collect(),
    };
    let ev = |md: &[usize; 2]| {
        if md[1] == 0 {
            axis_ev(0, md[0])
        } else {
            axis_ev(0, md[0]) + axis_ev(1, md[1])
        }
    };
    modes.sort_by(|a, b| ev(a).partial_cmp(&ev(b)).unwrap().then(a.cmp(b)));
    let eigenvalues = modes.iter().map(ev).collect();
    let mut j_k_index = vec![0; if domain.dim() == 2 { m * m } else { m }];
    for (pos, md) in modes.iter().enumerate() {
        let slot = if md[1] == 0 {
            md[0] - 1
        } else {
            (md[0] - 1) * m + md[1] - 1
        };
        j_k_index[slot] = pos;
    }
    let tables = (0..domain.dim())
        .map(|axis| AxisTable::new(domain.lengths[axis], domain.offset(axis), m, 2 * m + 1))
        .collect();
    Ok(Arc::new(Eigenbasis {
        domain,
        mode_count: m,
        eigenvalues,
        modes,
        j_k_index,
        tables,
    }))
}

impl Eigenbasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Interior collocation nodes per axis on the default grid.
    pub fn grid_size(&self) -> usize {
        self.tables[0].interior
    }

    pub fn first_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn default_tables(&self) -> &[AxisTable] {
        &self.tables
    }

    /// Tables for `interior` nodes per axis, reusing the default grid when possible.
    pub fn tables_for(&self, interior: usize) -> std::borrow::Cow<'_, [AxisTable]> {
        if interior == self.grid_size() {
            std::borrow::Cow::Borrowed(&self.tables)
        } else {
            std::borrow::Cow::Owned(
                (0..self.dim())
                    .map(|axis| {
                        AxisTable::new(
                            self.domain.lengths[axis],
                            self.domain.offset(axis),
                            self.mode_count,
                            interior,
                        )
                    })
                    .collect(),
            )
        }
    }

    /// Flattened position of the one-based mode `(j, k)`.
    pub fn position(&self, j: usize, k: usize) -> usize {
        if self.dim() == 1 {
            self.j_k_index[j - 1]
        } else {
            self.j_k_index[(j - 1) * self.mode_count + k - 1]
        }
    }

    /// Eigenfunction at flattened position `idx`, evaluated at a point.
    pub fn eval_mode(&self, idx: usize, x: &[f64]) -> f64 {
        let md = self.modes[idx];
        let one = |axis: usize, j: usize| {
            let l = self.domain.lengths[axis];
            (2.0 / l).sqrt() * (j as f64 * PI * (x[axis] - self.domain.offset(axis)) / l).sin()
        };
        if self.dim() == 1 {
            one(0, md[0])
        } else {
            one(0, md[0]) * one(1, md[1])
        }
    }

    /// Coefficient vector as an `M × M` matrix indexed by `(j−1, k−1)`.
    pub(crate) fn to_matrix(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let m = self.mode_count;
        DMatrix::from_fn(m, m, |j, k| coeffs[self.j_k_index[j * m + k]])
    }

    pub(crate) fn from_matrix(&self, a: &DMatrix<f64>) -> Vec<f64> {
        let m = self.mode_count;
        let mut out = vec![0.0; self.len()];
        for j in 0..m {
            for k in 0..m {
                out[self.j_k_index[j * m + k]] = a[(j, k)];
            }
        }
        out
    }
}
