//! Quadratic-form matrices behind the improved Kato inequality for `W±`,
//! in the formal basis `(dλ, dν, X, Y, Z)`, plus the grid-level check.

use crate::algebra::Chirality;
use crate::curvature::CurvatureBundle;
use crate::identities::{three_norm_sq, grad_norm_sq};
use crate::{exec, Error, Result};
use nalgebra::{Matrix3, SMatrix, SymmetricEigen};
use serde::Serialize;

pub type Mat5 = SMatrix<f64, 5, 5>;

/// Upper end (exclusive) of the admissible `k` range.
pub const K_MAX: f64 = 5.0 / 3.0;

#[derive(Clone, Debug)]
pub struct KatoMatrices {
    pub lambda: f64,
    pub nu: f64,
    pub k1: f64,
    pub k2: f64,
    pub m_nabla_w: Mat5,
    pub m_nabla_norm_w: Mat5,
    pub m_div_w: Mat5,
}

impl KatoMatrices {
    /// `M_Q = M_∇W + k₁ M_δW - k₂ M_∇|W|`.
    pub fn m_q(&self) -> Mat5 {
        self.m_nabla_w + self.m_div_w * self.k1 - self.m_nabla_norm_w * self.k2
    }
}

/// `k₁ = 8(k-1)/(5-3k)`.
pub fn kato_k1(k: f64) -> f64 {
    8.0 * (k - 1.0) / (5.0 - 3.0 * k)
}

fn spectral_scale(lambda: f64, nu: f64) -> Result<f64> {
    let s = lambda * lambda + nu * nu + lambda * nu;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::DegenerateSpectrum(format!("λ² + ν² + λν = {s} for λ = {lambda}, ν = {nu}")));
    }
    Ok(s)
}

fn check_k(k: f64) -> Result<()> {
    if !(0.0..K_MAX).contains(&k) {
        return Err(Error::OutOfRange(format!("k = {k} outside [0, 5/3)")));
    }
    Ok(())
}

/// The three matrices for free coefficients `k₁`, `k₂`.
pub fn assemble_matrices(lambda: f64, nu: f64, k1: f64, k2: f64) -> Result<KatoMatrices> {
    let s = spectral_scale(lambda, nu)?;
    let mut m_nabla_w = Mat5::identity() * 8.0;
    m_nabla_w[(0, 1)] = 4.0;
    m_nabla_w[(1, 0)] = 4.0;
    let p = 2.0 * lambda + nu;
    let q = lambda + 2.0 * nu;
    let mut m_nabla_norm_w = Mat5::zeros();
    m_nabla_norm_w[(0, 0)] = p * p;
    m_nabla_norm_w[(0, 1)] = p * q;
    m_nabla_norm_w[(1, 0)] = p * q;
    m_nabla_norm_w[(1, 1)] = q * q;
    m_nabla_norm_w *= 2.0 / s;
    #[rustfmt::skip]
    let m_div_w = Mat5::from_row_slice(&[
         2.0,  1.0,  1.0,  1.0, -2.0,
         1.0,  2.0,  2.0, -1.0, -1.0,
         1.0,  2.0,  2.0, -1.0, -1.0,
         1.0, -1.0, -1.0,  2.0, -1.0,
        -2.0, -1.0, -1.0, -1.0,  2.0,
    ]);
    Ok(KatoMatrices { lambda, nu, k1, k2, m_nabla_w, m_nabla_norm_w, m_div_w })
}

/// Matrices with `k₂ = k`, `k₁ = 8(k-1)/(5-3k)`.
pub fn assemble_mq(lambda: f64, nu: f64, k: f64) -> Result<KatoMatrices> {
    check_k(k)?;
    assemble_matrices(lambda, nu, kato_k1(k), k)
}

/// `det M_Q = 384(8+5k₁)(8+5k₁-8k₂-3k₁k₂)`.
pub fn closed_form_det(k1: f64, k2: f64) -> f64 {
    384.0 * (8.0 + 5.0 * k1) * (8.0 + 5.0 * k1 - 8.0 * k2 - 3.0 * k1 * k2)
}

/// Product of row norms, an upper bound on `|det|` used to scale residuals
/// of quantities that may vanish.
fn hadamard<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    m.row_iter().map(|r| r.norm()).product()
}

fn scaled_residual(numeric: f64, formula: f64, scale: f64) -> f64 {
    let d = numeric.abs().max(formula.abs()).max(scale);
    let r = (numeric - formula).abs();
    if d > 0.0 {
        r / d
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DeterminantCheck {
    pub numeric_det: f64,
    pub closed_form_det: f64,
    /// `|numeric - closed| / max(|closed|, Hadamard bound of M_Q)`.
    pub residual: f64,
}

pub fn determinant_check(lambda: f64, nu: f64, k1: f64, k2: f64) -> Result<DeterminantCheck> {
    let mq = assemble_matrices(lambda, nu, k1, k2)?.m_q();
    let numeric = mq.determinant();
    let closed = closed_form_det(k1, k2);
    Ok(DeterminantCheck {
        numeric_det: numeric,
        closed_form_det: closed,
        residual: scaled_residual(numeric, closed, hadamard(&mq)),
    })
}

/// The leading principal minor formulas of orders 2, 3 and 4 as printed in
/// the proof of the inequality, with `s = λ² + λν + ν²`.
pub fn displayed_minor(order: usize, lambda: f64, nu: f64, k: f64) -> f64 {
    let s = lambda * lambda + lambda * nu + nu * nu;
    let w = (1.0 - k).powi(2) / (5.0 - 3.0 * k).powi(2);
    match order {
        2 => 144.0 * (3.0 - k) * w,
        3 => 384.0 * w * ((3.0 + 2.0 * k) * lambda * lambda + (3.0 + k) * lambda * nu + (3.0 + k) * nu * nu) / s,
        4 => 3072.0 * k * w * (2.0 * lambda + nu).powi(2) / s,
        _ => f64::NAN,
    }
}

/// Symbolic leading principal minors of `M_Q`. Orders 2 and 4 coincide
/// with [`displayed_minor`]; order 3 carries `(3-k)` where the printed
/// formula has `(3+k)` in the `λν` and `ν²` coefficients.
pub fn corrected_minor(order: usize, lambda: f64, nu: f64, k: f64) -> f64 {
    match order {
        3 => {
            let s = lambda * lambda + lambda * nu + nu * nu;
            let w = (1.0 - k).powi(2) / (5.0 - 3.0 * k).powi(2);
            384.0 * w * ((3.0 + 2.0 * k) * lambda * lambda + (3.0 - k) * lambda * nu + (3.0 - k) * nu * nu) / s
        }
        _ => displayed_minor(order, lambda, nu, k),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinorCheck {
    pub order: usize,
    pub numeric: f64,
    pub displayed: f64,
    pub corrected: f64,
    pub displayed_residual: f64,
    pub corrected_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinorsReport {
    pub lambda: f64,
    pub nu: f64,
    pub k: f64,
    pub minors: [MinorCheck; 3],
    /// All five leading principal minors, numerically.
    pub leading_minors: [f64; 5],
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// Tolerance on the smallest eigenvalue of `M_Q` for the PSD verdict.
pub const PSD_TOLERANCE: f64 = 1e-10;

fn leading_minor(m: &Mat5, order: usize) -> f64 {
    m.view((0, 0), (order, order)).clone_owned().determinant()
}

pub fn minors_and_psd(lambda: f64, nu: f64, k: f64) -> Result<MinorsReport> {
    let mq = assemble_mq(lambda, nu, k)?.m_q();
    let leading_minors: [f64; 5] = std::array::from_fn(|i| leading_minor(&mq, i + 1));
    let minors = [2, 3, 4].map(|order| {
        let sub = mq.view((0, 0), (order, order));
        let scale: f64 = sub.row_iter().map(|r| r.norm()).product();
        let numeric = leading_minors[order - 1];
        let displayed = displayed_minor(order, lambda, nu, k);
        let corrected = corrected_minor(order, lambda, nu, k);
        MinorCheck {
            order,
            numeric,
            displayed,
            corrected,
            displayed_residual: scaled_residual(numeric, displayed, scale),
            corrected_residual: scaled_residual(numeric, corrected, scale),
        }
    });
    let min_eigenvalue = SymmetricEigen::new(mq).eigenvalues.min();
    Ok(MinorsReport { lambda, nu, k, minors, leading_minors, min_eigenvalue, psd: min_eigenvalue >= -PSD_TOLERANCE })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChiralKato {
    pub chirality: String,
    pub threshold: f64,
    pub nodes_checked: usize,
    pub nodes_total: usize,
    /// Minimum over checked nodes of `(|∇W±|² - rhs) / |∇W±|²`.
    pub min_relative_slack: f64,
    pub violations: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KatoReport {
    pub k: f64,
    pub k1: f64,
    pub plus: ChiralKato,
    pub minus: ChiralKato,
}

impl KatoReport {
    pub fn passed(&self) -> bool {
        self.plus.passed && self.minus.passed
    }
}

/// Relative slack tolerated below zero at each node.
pub const KATO_SLACK: f64 = 1e-8;

/// Check `|∇W±|² ≥ k|∇|W±||² - k₁|δW±|²` on the grid. Nodes with
/// `|W±| ≤ threshold` are skipped except for `k = 0`, where the inequality
/// does not involve `|W±|` and is checked everywhere. The default threshold
/// is `1e-6 · max|W±|`.
pub fn pointwise_kato_check(b: &CurvatureBundle, k: f64, threshold: Option<f64>) -> Result<KatoReport> {
    check_k(k)?;
    b.require_complete()?;
    let k1 = kato_k1(k);
    let run = |c: Chirality| {
        let norms = exec::map(b.len(), |p| {
            let pc = b.point(p);
            if c.is_plus() {
                pc.norm_weyl_plus
            } else {
                pc.norm_weyl_minus
            }
        });
        let wmax = norms.iter().cloned().fold(0.0, f64::max);
        let thr = threshold.unwrap_or(1e-6 * wmax);
        let slack = exec::map(b.len(), |p| {
            if k != 0.0 && norms[p] <= thr {
                return None;
            }
            let grad = b.grad_weyl_chiral(p, c);
            let g2 = grad_norm_sq(&grad);
            let d2 = three_norm_sq(&b.div_weyl_chiral(p, c));
            let n2 = if k == 0.0 {
                0.0
            } else {
                let w = b.weyl_chiral_frame(p, c);
                // d|W|_a = <W, ∇_a W> / |W| with |W|² = 4‖M‖²_F.
                grad.iter().map(|m| (4.0 * w.dot(m) / norms[p]).powi(2)).sum()
            };
            let lhs_minus_rhs = g2 - k * n2 + k1 * d2;
            Some(if g2 > 0.0 { lhs_minus_rhs / g2 } else { lhs_minus_rhs })
        });
        let checked: Vec<f64> = slack.into_iter().flatten().collect();
        let violations = checked.iter().filter(|&&s| s < -KATO_SLACK).count();
        ChiralKato {
            chirality: if c.is_plus() { "plus" } else { "minus" }.into(),
            threshold: thr,
            nodes_checked: checked.len(),
            nodes_total: b.len(),
            min_relative_slack: checked.iter().cloned().fold(f64::INFINITY, f64::min),
            violations,
            passed: violations == 0,
        }
    };
    Ok(KatoReport { k, k1, plus: run(Chirality::Plus), minus: run(Chirality::Minus) })
}

/// The 3×3 matrix in the basis `(dλ, X, Y)` arising when `W⁺` has the
/// eigenvalues `(λ, λ, -2λ)` and equality holds with `k = 3α`.
pub fn rigidity_matrix(alpha: f64) -> Result<Matrix3<f64>> {
    let den = 5.0 - 9.0 * alpha;
    if den.abs() < 1e-14 {
        return Err(Error::OutOfRange(format!("α = {alpha}: factor 8/(5-9α) is singular")));
    }
    let a = 1.0 - alpha;
    let b = 1.0 - 3.0 * alpha;
    #[rustfmt::skip]
    let m = Matrix3::new(
        9.0 * a, 3.0 * b, -3.0 * b,
        3.0 * b, 3.0 * a, b,
        -3.0 * b, b, 3.0 * a,
    );
    Ok(m * (8.0 / den))
}

pub fn rigidity_determinant(alpha: f64) -> Result<f64> {
    Ok(rigidity_matrix(alpha)?.determinant())
}

/// `288α(2-3α)`, the value printed for the determinant.
pub fn rigidity_determinant_displayed(alpha: f64) -> f64 {
    288.0 * alpha * (2.0 - 3.0 * alpha)
}

/// Exact determinant of [`rigidity_matrix`], `18432α(2-3α)/(5-9α)²`.
pub fn rigidity_determinant_closed_form(alpha: f64) -> f64 {
    18432.0 * alpha * (2.0 - 3.0 * alpha) / (5.0 - 9.0 * alpha).powi(2)
}
