use nalgebra::{Matrix3, Matrix4, SMatrix, SVector};

pub type Mat3 = Matrix3<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Vec6 = SVector<f64, 6>;

/// Ordered index pairs labelling the rows and columns of a [`Mat6`].
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

const SLOT: [[usize; 4]; 4] = [
    [usize::MAX, 0, 1, 2],
    [0, usize::MAX, 3, 4],
    [1, 3, usize::MAX, 5],
    [2, 4, 5, usize::MAX],
];

/// Slot of the pair `(i, j)` and the sign relating `T_..ij..` to the stored
/// `T_..(min,max)..`; `None` on the diagonal.
#[inline]
pub fn pair_slot(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        None
    } else {
        Some((SLOT[i][j], if i < j { 1.0 } else { -1.0 }))
    }
}

#[inline]
pub fn curvature_entry(m: &Mat6, i: usize, j: usize, k: usize, l: usize) -> f64 {
    match (pair_slot(i, j), pair_slot(k, l)) {
        (Some((a, sa)), Some((b, sb))) => sa * sb * m[(a, b)],
        _ => 0.0,
    }
}

pub fn curvature_from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Mat6 {
    Mat6::from_fn(|a, b| {
        let (i, j) = PAIRS[a];
        let (k, l) = PAIRS[b];
        f(i, j, k, l)
    })
}

/// `ε_ijkl` with `ε_0123 = 1`.
pub fn levi_civita(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let p = [i, j, k, l];
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] == p[b] {
                return 0.0;
            }
        }
    }
    let mut inv = 0;
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] > p[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Matrix induced by `E` on two-forms: `P[(ij),(ab)] = E_ia E_jb - E_ib E_ja`.
pub fn pair_lift(e: &Mat4) -> Mat6 {
    Mat6::from_fn(|r, c| {
        let (i, j) = PAIRS[r];
        let (a, b) = PAIRS[c];
        e[(i, a)] * e[(j, b)] - e[(i, b)] * e[(j, a)]
    })
}

/// Components `E_ia E_jb E_kc E_ld T_ijkl`, i.e. `Pᵀ M P`.
pub fn frame_transform(m: &Mat6, e: &Mat4) -> Mat6 {
    let p = pair_lift(e);
    p.transpose() * m * p
}

/// `|T_0123 + T_0231 + T_0312|`, the only independent first Bianchi sum for
/// a tensor already stored with pair symmetries.
pub fn bianchi_residual(m: &Mat6) -> f64 {
    (m[(0, 5)] - m[(1, 4)] + m[(2, 3)]).abs()
}

/// `(h ⊙ k)_ijkl = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il`.
pub fn kulkarni_nomizu(h: &Mat4, k: &Mat4) -> Mat6 {
    curvature_from_fn(|i, j, a, b| {
        h[(i, a)] * k[(j, b)] + h[(j, b)] * k[(i, a)] - h[(i, b)] * k[(j, a)] - h[(j, a)] * k[(i, b)]
    })
}

/// `Ric_ik = g^{jl} R_ijkl`.
pub fn ricci_contraction(m: &Mat6, ginv: &Mat4) -> Mat4 {
    let mut ric = Mat4::zeros();
    for i in 0..4 {
        for k in i..4 {
            let mut s = 0.0;
            for j in 0..4 {
                for l in 0..4 {
                    let gjl = ginv[(j, l)];
                    if gjl != 0.0 {
                        s += gjl * curvature_entry(m, i, j, k, l);
                    }
                }
            }
            ric[(i, k)] = s;
            ric[(k, i)] = s;
        }
    }
    ric
}

pub fn two_form_to_vec(w: &Mat4) -> Vec6 {
    Vec6::from_fn(|a, _| {
        let (i, j) = PAIRS[a];
        w[(i, j)]
    })
}

pub fn two_form_from_vec(v: &Vec6) -> Mat4 {
    let mut w = Mat4::zeros();
    for (a, &(i, j)) in PAIRS.iter().enumerate() {
        w[(i, j)] = v[a];
        w[(j, i)] = -v[a];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita(0, 1, 2, 3), 1.0);
        assert_eq!(levi_civita(1, 0, 2, 3), -1.0);
        assert_eq!(levi_civita(2, 3, 0, 1), 1.0);
        assert_eq!(levi_civita(0, 0, 2, 3), 0.0);
    }

    #[test]
    fn kulkarni_nomizu_of_metric_is_constant_curvature() {
        let g = Mat4::identity();
        let m = kulkarni_nomizu(&g, &g) * 0.5;
        assert_eq!(m, Mat6::identity());
        let ric = ricci_contraction(&m, &g);
        assert_eq!(ric, Mat4::identity() * 3.0);
    }

    #[test]
    fn frame_transform_matches_index_sum() {
        let e = Mat4::from_fn(|i, j| 1.0 / (1.0 + i as f64 + 2.0 * j as f64) + if i == j { 1.0 } else { 0.0 });
        let m = Mat6::from_fn(|a, b| ((a * 7 + b * 7 + a * b) as f64 * 0.1).sin());
        let m = (m + m.transpose()) * 0.5;
        let t = frame_transform(&m, &e);
        for &(a, b) in PAIRS.iter() {
            for &(c, d) in PAIRS.iter() {
                let mut s = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        for k in 0..4 {
                            for l in 0..4 {
                                s += e[(i, a)] * e[(j, b)] * e[(k, c)] * e[(l, d)] * curvature_entry(&m, i, j, k, l);
                            }
                        }
                    }
                }
                assert!((s - curvature_entry(&t, a, b, c, d)).abs() < 1e-12);
            }
        }
    }
}
