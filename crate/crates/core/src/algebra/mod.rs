//! Multilinear algebra at a single tangent space of a Riemannian 4-manifold.
//!
//! Tensors with the symmetries of a curvature tensor are stored as symmetric
//! 6×6 matrices over the ordered index pairs `(01, 02, 03, 12, 13, 23)`, with
//! `M[(ab),(cd)] = T_abcd`. With the operator convention
//! `(Tω)_kl = ½ T_ijkl ω_ij` the eigenvalues of `T` on `Λ²` are exactly the
//! eigenvalues of `M`, and `|T|² = 4 ‖M‖²_F` in an orthonormal frame.

mod eigen3;
mod frame;
mod pairs;
mod tensor;
mod weyl;

pub use eigen3::symmetric_eigenvalues3;
pub use frame::{hodge_star, LambdaFrame, PointFrame};
pub use pairs::{
    bianchi_residual, curvature_entry, curvature_from_fn, frame_transform, kulkarni_nomizu,
    levi_civita, pair_lift, pair_slot, ricci_contraction, two_form_from_vec, two_form_to_vec,
    Mat3, Mat4, Mat6, Vec6, PAIRS,
};
pub use tensor::{AlgebraicTensor4, CurvatureResiduals, SymmetryTag};
pub use weyl::{
    contract_ww, contract_ww_matrix, cubic_contraction, project_self_dual, random_algebraic_weyl,
    restrict_to_chirality, sigma2, sigma2_eigen, weyl_from_eigenvalues, weyl_spectrum,
    weyl_tensor_from_curvature, Chirality, Contraction, WeylSpectrum, CUBIC_BOUND,
};
