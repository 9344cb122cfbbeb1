use super::pairs::{levi_civita, two_form_from_vec, two_form_to_vec, Mat4, Mat6, Vec6, PAIRS};
use crate::{Error, Result};
use nalgebra::SMatrix;

/// Metric at a point together with its Cholesky orthonormal frame.
///
/// Columns of `frame` are the frame vectors `e_a = E_ia ∂_i`, with
/// `Eᵀ g E = I` and `det E > 0`, so the frame carries the coordinate
/// orientation.
#[derive(Clone, Copy, Debug)]
pub struct PointFrame {
    metric: Mat4,
    frame: Mat4,
    coframe: Mat4,
    inverse: Mat4,
    volume_factor: f64,
}

impl PointFrame {
    pub fn new(g: Mat4) -> Result<Self> {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMetric("non-finite metric entry".into()));
        }
        let asym = (g - g.transpose()).amax();
        if asym > 1e-12 * g.amax().max(1.0) {
            return Err(Error::InvalidMetric(format!("metric asymmetric by {asym:.3e}")));
        }
        let g = (g + g.transpose()) * 0.5;
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::InvalidMetric("Cholesky factorization failed".into()))?;
        let l = chol.l();
        if (0..4).any(|i| l[(i, i)] <= 0.0 || !l[(i, i)].is_finite()) {
            return Err(Error::InvalidMetric("non-positive Cholesky pivot".into()));
        }
        let coframe = l.transpose();
        let frame = coframe
            .try_inverse()
            .ok_or_else(|| Error::InvalidMetric("singular Cholesky factor".into()))?;
        let volume_factor = (0..4).map(|i| l[(i, i)]).product();
        Ok(Self { metric: g, frame, coframe, inverse: chol.inverse(), volume_factor })
    }

    pub fn metric(&self) -> &Mat4 {
        &self.metric
    }

    /// `E`, columns are the frame vectors in coordinates.
    pub fn frame(&self) -> &Mat4 {
        &self.frame
    }

    /// `E⁻¹`, rows are the dual coframe one-forms.
    pub fn coframe(&self) -> &Mat4 {
        &self.coframe
    }

    pub fn inverse_metric(&self) -> &Mat4 {
        &self.inverse
    }

    pub fn orientation(&self) -> i8 {
        1
    }

    pub fn volume_factor(&self) -> f64 {
        self.volume_factor
    }

    /// Coordinate two-form to frame components, `Eᵀ ω E`.
    pub fn two_form_to_frame(&self, w: &Mat4) -> Mat4 {
        self.frame.transpose() * w * self.frame
    }

    pub fn two_form_from_frame(&self, w: &Mat4) -> Mat4 {
        self.coframe.transpose() * w * self.coframe
    }

    /// Maximum deviation of `Eᵀ g E` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        (self.frame.transpose() * self.metric * self.frame - Mat4::identity()).amax()
    }
}

/// Hodge star on frame pair vectors: `(★ω)_ab = ½ ε_abcd ω_cd`.
pub(crate) fn star_matrix() -> Mat6 {
    Mat6::from_fn(|b, a| {
        let (i, j) = PAIRS[b];
        let (k, l) = PAIRS[a];
        levi_civita(i, j, k, l)
    })
}

fn check_two_form(w: &Mat4) -> Result<()> {
    let asym = (w + w.transpose()).amax();
    if asym > 1e-12 * w.amax().max(1.0) {
        return Err(Error::ShapeError(format!("not a two-form (symmetric part {asym:.3e})")));
    }
    Ok(())
}

/// `★ω` for a coordinate two-form `ω_ij` (matrix, antisymmetric).
pub fn hodge_star(pf: &PointFrame, w: &Mat4) -> Result<Mat4> {
    check_two_form(w)?;
    let v = two_form_to_vec(&pf.two_form_to_frame(w));
    let starred = two_form_from_vec(&(star_matrix() * v));
    Ok(pf.two_form_from_frame(&starred))
}

/// Orthogonal bases of `Λ⁺` and `Λ⁻` (frame components, `|ω|² = 2`) forming
/// quaternionic triples, plus the star matrix on frame pair vectors.
#[derive(Clone, Debug)]
pub struct LambdaFrame {
    plus: [Vec6; 3],
    minus: [Vec6; 3],
    star: Mat6,
}

impl LambdaFrame {
    /// Basis obtained by projecting the coordinate forms `dxⁱ∧dxʲ` (in
    /// lexicographic order) onto `Λ±`, orthogonalizing the first two
    /// independent ones and completing with their product.
    pub fn from_point_frame(pf: &PointFrame) -> Result<Self> {
        let star = star_matrix();
        let seeds: Vec<Vec6> = PAIRS
            .iter()
            .map(|&(i, j)| {
                let mut w = Mat4::zeros();
                w[(i, j)] = 1.0;
                w[(j, i)] = -1.0;
                two_form_to_vec(&pf.two_form_to_frame(&w))
            })
            .collect();
        let build = |sign: f64| -> Result<[Vec6; 3]> {
            let mut got: Vec<Vec6> = Vec::with_capacity(2);
            for s in &seeds {
                let mut v = (s + star * s * sign) * 0.5;
                for g in &got {
                    v -= g * (g.dot(&v) / 2.0);
                }
                let n = v.norm();
                if n > 1e-8 * s.norm() {
                    got.push(v * (2f64.sqrt() / n));
                }
                if got.len() == 2 {
                    break;
                }
            }
            if got.len() < 2 {
                return Err(Error::FrameError("projected seeds are degenerate".into()));
            }
            let theta = two_form_from_vec(&got[0]) * two_form_from_vec(&got[1]);
            Ok([got[0], got[1], two_form_to_vec(&theta)])
        };
        let lf = Self { plus: build(1.0)?, minus: build(-1.0)?, star };
        lf.verify()?;
        Ok(lf)
    }

    /// The basis for the Euclidean frame; every orthonormal frame uses it.
    pub fn standard() -> Self {
        Self::from_point_frame(&PointFrame::new(Mat4::identity()).expect("identity is SPD"))
            .expect("standard basis is valid")
    }

    /// Basis from explicit frame two-forms; validated with [`Self::verify`].
    pub fn new(plus: [Mat4; 3], minus: [Mat4; 3]) -> Result<Self> {
        for w in plus.iter().chain(minus.iter()) {
            check_two_form(w)?;
        }
        let lf = Self {
            plus: plus.map(|w| two_form_to_vec(&w)),
            minus: minus.map(|w| two_form_to_vec(&w)),
            star: star_matrix(),
        };
        lf.verify()?;
        Ok(lf)
    }

    pub fn star_matrix(&self) -> &Mat6 {
        &self.star
    }

    pub fn basis_plus(&self) -> [Mat4; 3] {
        self.plus.map(|v| two_form_from_vec(&v))
    }

    pub fn basis_minus(&self) -> [Mat4; 3] {
        self.minus.map(|v| two_form_from_vec(&v))
    }

    pub fn vectors(&self, plus: bool) -> &[Vec6; 3] {
        if plus {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// 6×3 matrix whose columns are the basis forms scaled to unit pair norm.
    pub fn orthonormal_columns(&self, plus: bool) -> SMatrix<f64, 6, 3> {
        let v = self.vectors(plus);
        SMatrix::<f64, 6, 3>::from_columns(&[v[0], v[1], v[2]]) / 2f64.sqrt()
    }

    /// Checks `★² = I`, duality, `|ω|² = 2`, orthogonality and the
    /// quaternionic products, all to `1e-12`.
    pub fn verify(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let s2 = (self.star * self.star - Mat6::identity()).amax();
        if s2 > TOL {
            return Err(Error::FrameError(format!("star does not square to identity ({s2:.3e})")));
        }
        for (basis, sign) in [(&self.plus, 1.0), (&self.minus, -1.0)] {
            for a in 0..3 {
                let dual = (self.star * basis[a] - basis[a] * sign).amax();
                if dual > TOL {
                    return Err(Error::FrameError(format!("basis form {a} not in the ±{sign} eigenspace")));
                }
                for b in 0..3 {
                    let want = if a == b { 2.0 } else { 0.0 };
                    let dot = basis[a].dot(&basis[b]);
                    if (dot - want).abs() > TOL {
                        return Err(Error::FrameError(format!("Gram entry ({a},{b}) = {dot}")));
                    }
                }
            }
            let f = basis.map(|v| two_form_from_vec(&v));
            for a in 0..3 {
                if (f[a] * f[a] + Mat4::identity()).amax() > TOL {
                    return Err(Error::FrameError("basis form does not square to -1".into()));
                }
                let b = (a + 1) % 3;
                let c = (a + 2) % 3;
                if (f[a] * f[b] - f[c]).amax() > TOL {
                    return Err(Error::FrameError(format!("quaternionic relation {a}{b}={c} fails")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn spd(seed: u64) -> Mat4 {
        let a = Mat4::from_fn(|i, j| (((seed + 3) * (i as u64 * 5 + j as u64 + 1)) as f64 * 0.917).sin());
        a * a.transpose() + Mat4::identity() * 0.5
    }

    fn coordinate_star(g: &Mat4, w: &Mat4) -> Mat4 {
        let gi = g.try_inverse().unwrap();
        let vol = g.determinant().sqrt();
        let up = gi * w * gi;
        Mat4::from_fn(|i, j| {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += 0.5 * vol * levi_civita(i, j, k, l) * up[(k, l)];
                }
            }
            s
        })
    }

    #[test]
    fn euclidean_orientation() {
        let pf = PointFrame::new(Mat4::identity()).unwrap();
        let mut w = Mat4::zeros();
        w[(0, 1)] = 1.0;
        w[(1, 0)] = -1.0;
        let s = hodge_star(&pf, &w).unwrap();
        let mut want = Mat4::zeros();
        want[(2, 3)] = 1.0;
        want[(3, 2)] = -1.0;
        assert_eq!(s, want);
        assert_eq!(hodge_star(&pf, &Mat4::zeros()).unwrap(), Mat4::zeros());
    }

    #[test]
    fn star_is_an_involution_and_matches_coordinate_formula() {
        for seed in 0..20 {
            let g = spd(seed);
            let pf = PointFrame::new(g).unwrap();
            assert!(pf.orthonormality_residual() < 1e-12);
            assert!((pf.volume_factor() - g.determinant().sqrt()).abs() < 1e-12 * pf.volume_factor());
            let a = Mat4::from_fn(|i, j| ((seed as f64 + 1.0) * (i as f64 - 2.0 * j as f64)).cos());
            let w = a - a.transpose();
            let s = hodge_star(&pf, &w).unwrap();
            assert!((hodge_star(&pf, &s).unwrap() - w).amax() < 1e-12 * w.amax());
            assert!((s - coordinate_star(&g, &w)).amax() < 1e-12 * w.amax().max(1.0));
        }
    }

    #[test]
    fn rejects_indefinite_metric() {
        let g = Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, 1.0));
        assert!(matches!(PointFrame::new(g), Err(Error::InvalidMetric(_))));
        let mut g = Mat4::identity();
        g[(0, 1)] = 0.5;
        assert!(matches!(PointFrame::new(g), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn lambda_frames_are_valid_for_random_metrics() {
        let lf = LambdaFrame::standard();
        let e = SymmetricEigen::new(*lf.star_matrix()).eigenvalues;
        assert_eq!(e.iter().filter(|&&x| (x - 1.0).abs() < 1e-12).count(), 3);
        assert_eq!(e.iter().filter(|&&x| (x + 1.0).abs() < 1e-12).count(), 3);
        for seed in 0..20 {
            let pf = PointFrame::new(spd(seed)).unwrap();
            LambdaFrame::from_point_frame(&pf).unwrap().verify().unwrap();
        }
    }

    #[test]
    fn new_rejects_non_orthonormal_basis() {
        let lf = LambdaFrame::standard();
        let mut plus = lf.basis_plus();
        plus[0] *= 2.0;
        assert!(matches!(LambdaFrame::new(plus, lf.basis_minus()), Err(Error::FrameError(_))));
    }
}
