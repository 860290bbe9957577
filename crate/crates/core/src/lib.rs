//! Spectral fractional Laplacian on intervals and rectangles, the
//! Caffarelli-Silvestre extension as an independent oracle, and constructive
//! solvers for the concave-convex problem
//! `(-Δ)^{α/2} u = λ u^q + u^p` with homogeneous Dirichlet data.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: Gamma function, explicit constants, the extension profile.
//! * [`spectral`]: Dirichlet eigenbasis, transforms, diagonal operators.
//! * [`extension`]: half-cylinder extension by modes and by finite differences.
//! * [`semilinear`]: monotone iteration, Newton, mountain pass.
//! * [`branch`]: continuation in λ and location of the critical parameter.
//! * [`verification`]: Pohozaev defect, nonexistence runs, trace quotients.

pub mod branch;
pub mod error;
pub mod extension;
pub mod parallel;
pub mod quadrature;
pub mod semilinear;
pub mod special;
pub mod spectral;
pub mod verification;

pub use error::{FracError, Result};
pub use parallel::Execution;
pub use special::FracParams;
