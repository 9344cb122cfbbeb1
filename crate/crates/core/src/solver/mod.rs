//! The conformal-factor problem on a fixed background: the operator
//! `L = -div(a∇·) + c`, its first eigenpair, the minimization of `𝔇`, the
//! sub/supersolution iteration for `Lu = βu⁻⁵`, and the a posteriori
//! checks.

mod cg;
mod checks;
mod descent;
mod eigen;
mod monotone;
mod operator;

pub use cg::{solve_spd, CgOutcome};
pub use checks::{bounds_check, bounds_report, weak_harmonic_residual, weak_harmonic_residual_bundle, BoundsReport, WeakHarmonicReport, BOUNDS_TOL};
pub use descent::{
    euler_lagrange_residual, is_degenerate, minimize_d, minimize_d_with, normalize_inverse_quartic, MinimizeOptions, MinimizeResult,
    MinimizeSummary,
};
pub use eigen::{first_eigenpair, first_eigenpair_with, inverse_iteration_shift, EigenOptions, SpectralResult, SpectralSummary};
pub use monotone::{monotone_iteration, monotone_iteration_with, power_equation_residual, MonotoneOptions, MonotoneResult, MonotoneSummary};
pub use operator::{apply_l, functional_d, EllipticOperator, Mode, DEGENERACY_THRESHOLD};
