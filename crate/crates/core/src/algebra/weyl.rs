use super::eigen3::symmetric_eigenvalues3;
use super::frame::{LambdaFrame, PointFrame};
use super::pairs::{curvature_entry, kulkarni_nomizu, ricci_contraction, Mat3, Mat4, Mat6, PAIRS};
use super::tensor::AlgebraicTensor4;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `W³ ≤ CUBIC_BOUND · |W±|³` for (anti-)self-dual Weyl tensors.
pub const CUBIC_BOUND: f64 = 0.408_248_290_463_863_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn is_plus(self) -> bool {
        matches!(self, Chirality::Plus)
    }
}

/// Eigenvalues `lambda ≤ mu ≤ nu` of a Weyl operator on `Λ±`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylSpectrum {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
}

impl WeylSpectrum {
    pub fn from_matrix3(m: &Mat3) -> Self {
        let [lambda, mu, nu] = symmetric_eigenvalues3(m);
        Self { lambda, mu, nu }
    }

    pub fn sum(&self) -> f64 {
        self.lambda + self.mu + self.nu
    }

    /// `λ² + μ² + ν² = ¼|W±|²`.
    pub fn norm_sq(&self) -> f64 {
        self.lambda * self.lambda + self.mu * self.mu + self.nu * self.nu
    }
}

/// `T_tl = W_ijkt W_ijkl` and the worst deviation from `¼|W|² δ_tl`.
#[derive(Clone, Copy, Debug)]
pub struct Contraction {
    pub tensor: Mat4,
    pub residual: f64,
}

/// Weyl part of a curvature tensor in dimension four:
/// `W = Rm - ½ Ric ⊙ g + (R/12) g ⊙ g`.
pub fn weyl_tensor_from_curvature(rm: &Mat6, g: &Mat4, ginv: &Mat4) -> Mat6 {
    let ric = ricci_contraction(rm, ginv);
    let r = (ginv * ric).trace();
    rm - kulkarni_nomizu(&ric, g) * 0.5 + kulkarni_nomizu(g, g) * (r / 12.0)
}

/// Pseudo-random tensor with all the symmetries of a Weyl tensor, in an
/// orthonormal frame. Deterministic in `seed`.
pub fn random_algebraic_weyl(seed: u64) -> AlgebraicTensor4 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let at = |i: usize, j: usize, k: usize, l: usize| x[((i * 4 + j) * 4 + k) * 4 + l];
    // Antisymmetrize both pairs, symmetrize the pair exchange.
    let r = super::pairs::curvature_from_fn(|i, j, k, l| {
        let a = |i, j, k, l| at(i, j, k, l) - at(j, i, k, l) - at(i, j, l, k) + at(j, i, l, k);
        0.125 * (a(i, j, k, l) + a(k, l, i, j))
    });
    let r = (r + r.transpose()) * 0.5;
    // Remove the totally antisymmetric part, which restores Bianchi.
    let mut r = r;
    let b = (r[(0, 5)] - r[(1, 4)] + r[(2, 3)]) / 3.0;
    r[(0, 5)] -= b;
    r[(5, 0)] -= b;
    r[(1, 4)] += b;
    r[(4, 1)] += b;
    r[(2, 3)] -= b;
    r[(3, 2)] -= b;
    let g = Mat4::identity();
    AlgebraicTensor4::from_curvature(&weyl_tensor_from_curvature(&r, &g, &g))
}

fn projectors(lf: &LambdaFrame) -> (Mat6, Mat6) {
    let s = lf.star_matrix();
    ((Mat6::identity() + s) * 0.5, (Mat6::identity() - s) * 0.5)
}

fn weyl_checks(w: &AlgebraicTensor4) -> Result<Mat6> {
    let m = w.to_pair_matrix()?;
    let scale = w.max_abs().max(f64::MIN_POSITIVE);
    let sym = w.curvature_residuals().max();
    if sym > 1e-10 * scale {
        return Err(Error::SymmetryError(format!("curvature symmetries violated by {sym:.3e}")));
    }
    let tr = w.max_trace();
    if tr > 1e-10 * scale {
        return Err(Error::SymmetryError(format!("tensor is not trace-free (trace {tr:.3e})")));
    }
    Ok(m)
}

/// `W = W⁺ + W⁻` with `W± = P± W P±`, `P± = ½(I ± ★)`.
///
/// Components are taken in the orthonormal frame `lf` is expressed in.
pub fn project_self_dual(w: &AlgebraicTensor4, lf: &LambdaFrame) -> Result<(AlgebraicTensor4, AlgebraicTensor4)> {
    let m = weyl_checks(w)?;
    let (pp, pm) = projectors(lf);
    let mixed = (pp * m * pm).amax();
    if mixed > 1e-10 * m.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::SymmetryError(format!("W does not commute with the Hodge star ({mixed:.3e})")));
    }
    Ok((
        AlgebraicTensor4::from_curvature(&(pp * m * pp)),
        AlgebraicTensor4::from_curvature(&(pm * m * pm)),
    ))
}

/// 3×3 matrix of `M` on `Λ±` in the orthonormal basis of `lf`.
pub fn restrict_to_chirality(m: &Mat6, lf: &LambdaFrame, chirality: Chirality) -> Mat3 {
    let q = lf.orthonormal_columns(chirality.is_plus());
    q.transpose() * m * q
}

/// Spectrum of a self-dual or anti-self-dual Weyl tensor; the chirality is
/// read off from which half carries the tensor.
pub fn weyl_spectrum(w: &AlgebraicTensor4, lf: &LambdaFrame) -> Result<WeylSpectrum> {
    lf.verify()?;
    let m = weyl_checks(w)?;
    let (pp, pm) = projectors(lf);
    let scale = m.amax();
    let off_plus = (m - pp * m * pp).amax();
    let off_minus = (m - pm * m * pm).amax();
    let chirality = if off_plus <= 1e-10 * scale {
        Chirality::Plus
    } else if off_minus <= 1e-10 * scale {
        Chirality::Minus
    } else {
        return Err(Error::SymmetryError("tensor is neither self-dual nor anti-self-dual".into()));
    };
    Ok(WeylSpectrum::from_matrix3(&restrict_to_chirality(&m, lf, chirality)))
}

/// `½(λ ω⊗ω + μ η⊗η + ν θ⊗θ)` in the basis of `lf`, after removing the mean
/// of the eigenvalues so the result is trace-free.
pub fn weyl_from_eigenvalues(lf: &LambdaFrame, chirality: Chirality, eig: [f64; 3]) -> AlgebraicTensor4 {
    let mean = (eig[0] + eig[1] + eig[2]) / 3.0;
    let v = lf.vectors(chirality.is_plus());
    let mut m = Mat6::zeros();
    for a in 0..3 {
        m += v[a] * v[a].transpose() * (0.5 * (eig[a] - mean));
    }
    AlgebraicTensor4::from_curvature(&m)
}

/// `T_tl = W_ijkt W_ijkl` from the pair matrix, orthonormal frame.
pub fn contract_ww_matrix(m: &Mat6) -> Contraction {
    let mut t = Mat4::zeros();
    for a in 0..4 {
        for b in a..4 {
            let mut s = 0.0;
            for p in 0..6 {
                for k in 0..4 {
                    s += curvature_entry(m, PAIRS[p].0, PAIRS[p].1, k, a) * curvature_entry(m, PAIRS[p].0, PAIRS[p].1, k, b);
                }
            }
            t[(a, b)] = 2.0 * s;
            t[(b, a)] = 2.0 * s;
        }
    }
    let quarter = m.norm_squared();
    let residual = (t - Mat4::identity() * quarter).amax();
    Contraction { tensor: t, residual }
}

pub fn contract_ww(w: &AlgebraicTensor4) -> Result<Contraction> {
    Ok(contract_ww_matrix(&w.to_pair_matrix()?))
}

/// `W_ijkl W_ijpq W_klpq = 8 tr(M³)`.
pub fn cubic_contraction(m: &Mat6) -> f64 {
    8.0 * (m * m * m).trace()
}

/// `σ₂(A) = R²/96 - |Ric̊|²/8`, recovering `R = 6 tr_g A` and
/// `Ric̊ = 2A - (R/12) g` from the Schouten tensor.
pub fn sigma2(schouten: &Mat4, g: &Mat4) -> Result<f64> {
    let pf = PointFrame::new(*g)?;
    let gi = pf.inverse_metric();
    let r = 6.0 * (gi * schouten).trace();
    let ric0 = schouten * 2.0 - g * (r / 12.0);
    let norm = (gi * ric0 * gi * ric0).trace();
    Ok(r * r / 96.0 - norm / 8.0)
}

/// `σ₂` as the second elementary symmetric polynomial of the eigenvalues
/// of `A` raised by `g`.
pub fn sigma2_eigen(schouten: &Mat4, g: &Mat4) -> Result<f64> {
    let pf = PointFrame::new(*g)?;
    let e = pf.frame();
    let a = e.transpose() * schouten * e;
    let eig = nalgebra::SymmetricEigen::new((a + a.transpose()) * 0.5).eigenvalues;
    let mut s = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            s += eig[i] * eig[j];
        }
    }
    Ok(s)
}
