use super::pairs::{curvature_entry, curvature_from_fn, Mat4, Mat6};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SymmetryTag {
    None,
    Symmetric2,
    CurvatureLike,
    CottonLike,
}

/// Dense tensor with `rank` lower indices on a 4-dimensional space,
/// components in row-major order (`T_{i₁…i_r}` at `Σ i_k 4^{r-k}`).
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicTensor4 {
    rank: usize,
    components: Vec<f64>,
    tag: SymmetryTag,
}

/// Worst absolute violation of each curvature symmetry.
#[derive(Clone, Copy, Debug, Default)]
pub struct CurvatureResiduals {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
}

impl CurvatureResiduals {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi)
    }
}

const TOL: f64 = 1e-12;

impl AlgebraicTensor4 {
    /// Validates the shape and, to `1e-12 · max(1, max|T|)`, the invariants
    /// implied by `tag`.
    pub fn new(rank: usize, components: Vec<f64>, tag: SymmetryTag) -> Result<Self> {
        Self::with_tolerance(rank, components, tag, TOL)
    }

    pub fn with_tolerance(rank: usize, components: Vec<f64>, tag: SymmetryTag, tol: f64) -> Result<Self> {
        if !(1..=4).contains(&rank) {
            return Err(Error::ShapeError(format!("rank {rank} outside 1..=4")));
        }
        if components.len() != 4usize.pow(rank as u32) {
            return Err(Error::ShapeError(format!(
                "rank {rank} needs {} components, got {}",
                4usize.pow(rank as u32),
                components.len()
            )));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::ShapeError("non-finite component".into()));
        }
        let required = match tag {
            SymmetryTag::None => None,
            SymmetryTag::Symmetric2 => Some(2),
            SymmetryTag::CurvatureLike => Some(4),
            SymmetryTag::CottonLike => Some(3),
        };
        if let Some(r) = required {
            if r != rank {
                return Err(Error::ShapeError(format!("{tag:?} requires rank {r}")));
            }
        }
        let t = Self { rank, components, tag };
        t.check(tol)?;
        Ok(t)
    }

    pub fn zeros(rank: usize, tag: SymmetryTag) -> Self {
        Self { rank, components: vec![0.0; 4usize.pow(rank as u32)], tag }
    }

    pub fn from_fn(rank: usize, tag: SymmetryTag, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let len = 4usize.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let components = (0..len)
            .map(|flat| {
                let mut r = flat;
                for k in (0..rank).rev() {
                    idx[k] = r % 4;
                    r /= 4;
                }
                f(&idx)
            })
            .collect();
        Self::new(rank, components, tag)
    }

    /// Curvature-like tensor from its pair matrix (symmetrized).
    pub fn from_curvature(m: &Mat6) -> Self {
        let m = (m + m.transpose()) * 0.5;
        let mut components = vec![0.0; 256];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        components[((i * 4 + j) * 4 + k) * 4 + l] = curvature_entry(&m, i, j, k, l);
                    }
                }
            }
        }
        Self { rank: 4, components, tag: SymmetryTag::CurvatureLike }
    }

    pub fn from_symmetric(m: &Mat4) -> Self {
        let components = (0..16).map(|f| 0.5 * (m[(f / 4, f % 4)] + m[(f % 4, f / 4)])).collect();
        Self { rank: 2, components, tag: SymmetryTag::Symmetric2 }
    }

    /// Rank-3 tensor from `c[i][slot(jk)] = C_ijk` (antisymmetric in `jk`).
    pub fn from_cotton(c: &[[f64; 6]; 4], tag: SymmetryTag) -> Result<Self> {
        Self::from_fn(3, tag, |ix| match super::pairs::pair_slot(ix[1], ix[2]) {
            Some((s, sign)) => sign * c[ix[0]][s],
            None => 0.0,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tag(&self) -> SymmetryTag {
        self.tag
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank);
        self.components[idx.iter().fold(0, |acc, &i| acc * 4 + i)]
    }

    #[inline]
    pub fn get4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.components[((i * 4 + j) * 4 + k) * 4 + l]
    }

    /// Pair matrix of a rank-4 tensor (no symmetry check).
    pub fn to_pair_matrix(&self) -> Result<Mat6> {
        if self.rank != 4 {
            return Err(Error::ShapeError("pair matrix needs rank 4".into()));
        }
        Ok(curvature_from_fn(|i, j, k, l| self.get4(i, j, k, l)))
    }

    pub fn to_mat4(&self) -> Result<Mat4> {
        if self.rank != 2 {
            return Err(Error::ShapeError("matrix view needs rank 2".into()));
        }
        Ok(Mat4::from_fn(|i, j| self.components[i * 4 + j]))
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Squared norm with respect to an orthonormal frame.
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum()
    }

    pub fn curvature_residuals(&self) -> CurvatureResiduals {
        let mut r = CurvatureResiduals::default();
        if self.rank != 4 {
            return r;
        }
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let t = self.get4(i, j, k, l);
                        r.antisymmetry = r
                            .antisymmetry
                            .max((t + self.get4(j, i, k, l)).abs())
                            .max((t + self.get4(i, j, l, k)).abs());
                        r.pair_symmetry = r.pair_symmetry.max((t - self.get4(k, l, i, j)).abs());
                        r.bianchi = r
                            .bianchi
                            .max((t + self.get4(i, k, l, j) + self.get4(i, l, j, k)).abs());
                    }
                }
            }
        }
        r
    }

    /// Largest single trace in an orthonormal frame, over every index pair.
    pub fn max_trace(&self) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        if r < 2 {
            return 0.0;
        }
        for a in 0..r {
            for b in a + 1..r {
                let free = r - 2;
                for rest in 0..4usize.pow(free as u32) {
                    let mut s = 0.0;
                    for t in 0..4 {
                        let mut idx = vec![0usize; r];
                        let mut rr = rest;
                        for k in (0..r).rev() {
                            if k == a || k == b {
                                continue;
                            }
                            idx[k] = rr % 4;
                            rr /= 4;
                        }
                        idx[a] = t;
                        idx[b] = t;
                        s += self.get(&idx);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let scale = tol * self.max_abs().max(1.0);
        match self.tag {
            SymmetryTag::None => Ok(()),
            SymmetryTag::Symmetric2 => {
                let m = self.to_mat4()?;
                let asym = (m - m.transpose()).amax();
                if asym > scale {
                    return Err(Error::SymmetryError(format!("asymmetry {asym:.3e}")));
                }
                Ok(())
            }
            SymmetryTag::CurvatureLike => {
                let r = self.curvature_residuals();
                if r.max() > scale {
                    return Err(Error::SymmetryError(format!("curvature symmetries violated: {r:?}")));
                }
                Ok(())
            }
            SymmetryTag::CottonLike => {
                let mut anti: f64 = 0.0;
                let mut cyc: f64 = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        for k in 0..4 {
                            let c = self.get(&[i, j, k]);
                            anti = anti.max((c + self.get(&[i, k, j])).abs());
                            cyc = cyc.max((c + self.get(&[j, k, i]) + self.get(&[k, i, j])).abs());
                        }
                    }
                }
                let tr = self.max_trace();
                if anti.max(cyc).max(tr) > scale {
                    return Err(Error::SymmetryError(format!(
                        "cotton symmetries violated: antisymmetry {anti:.3e}, cyclic {cyc:.3e}, trace {tr:.3e}"
                    )));
                }
                Ok(())
            }
        }
    }
}
