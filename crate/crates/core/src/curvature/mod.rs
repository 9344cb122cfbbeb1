//! The curvature chain of a metric field: Christoffel symbols, Riemann,
//! Ricci, scalar, Schouten and Weyl tensors, the self-dual splitting, the
//! Cotton tensor, `∇W`, `δW` and the one-form `B_s = W_sijk W_pijk,p`.
//!
//! Conventions: `R^l_ijk ∂_l = R(∂_j, ∂_k) ∂_i`, `R_ijkl = g_im R^m_jkl`,
//! `R_ik = g^jl R_ijkl` (round spheres have positive curvature), and
//! `(δW)_ijk = W_tijk,t`.

mod bundle;
mod conformal;

pub use bundle::{compute_curvature, CurvatureBundle, PointCurvature, PointDerivatives, BUNDLE_FIELDS};
pub use conformal::{conformal_rescale, div_weyl_transform, DivWeylTransform};
