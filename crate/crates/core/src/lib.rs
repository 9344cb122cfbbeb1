//! Curvature of periodic Riemannian 4-tori, Weyl tensor identities, the
//! improved Kato inequality for `W±`, and a solver for the conformal
//! minimization of `Vol^{1/2} ∫|δW|² dV` whose critical points are weak
//! harmonic Weyl metrics.
//!
//! Layout:
//! - [`algebra`]: pointwise multilinear algebra on a single tangent space.
//! - [`field`]: periodic grids, spectral derivatives, quadrature, dumps.
//! - [`curvature`]: the curvature chain of a metric field.
//! - [`identities`]: pointwise and integral identity residuals.
//! - [`kato`]: the 5×5 quadratic forms behind the improved Kato inequality.
//! - [`solver`]: the elliptic operator `L`, its first eigenpair, the
//!   minimization of `𝔇` and the sub/supersolution iteration.
//! - [`report`]: Riemannian functionals and pinching diagnostics.
//!
//! Grid loops run on rayon when the `parallel` feature is on (the default).
//! [`exec::sequential`] forces the sequential path at runtime.

pub mod algebra;
pub mod curvature;
pub mod error;
pub mod exec;
pub mod field;
pub mod identities;
pub mod kato;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
