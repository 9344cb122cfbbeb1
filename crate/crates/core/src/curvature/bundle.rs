use crate::algebra::{
    curvature_entry, curvature_from_fn, frame_transform, pair_slot, restrict_to_chirality, ricci_contraction,
    weyl_tensor_from_curvature, Chirality, LambdaFrame, Mat3, Mat4, Mat6, PointFrame, PAIRS,
};
use crate::field::{Field, GridSpec, MetricField, Spectral};
use crate::{exec, Error, Result};
use nalgebra::SMatrix;

const UPPER: [(usize, usize); 10] = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

#[inline]
fn upper_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    UPPER.iter().position(|&p| p == (a, b)).expect("valid index pair")
}

/// Zeroth and first-order curvature at one node.
///
/// Coordinate components unless the name says `frame`. Frame quantities
/// refer to the Cholesky frame `frame`, and `weyl_plus/minus` are 3×3
/// matrices in the orthonormal basis of [`LambdaFrame::standard`].
#[derive(Clone, Debug)]
pub struct PointCurvature {
    pub metric: Mat4,
    pub inverse: Mat4,
    pub frame: Mat4,
    pub coframe: Mat4,
    pub volume: f64,
    /// `christoffel[k][(i, j)] = Γ^k_ij`.
    pub christoffel: [Mat4; 4],
    pub riemann: Mat6,
    pub ricci: Mat4,
    pub scalar: f64,
    pub tracefree_ricci: Mat4,
    pub schouten: Mat4,
    pub weyl: Mat6,
    pub weyl_frame: Mat6,
    pub weyl_plus: Mat3,
    pub weyl_minus: Mat3,
    pub norm_weyl_plus: f64,
    pub norm_weyl_minus: f64,
}

/// Derivative quantities at one node, all in the Cholesky frame except
/// `one_form_b`, which is in coordinates.
#[derive(Clone, Debug)]
pub struct PointDerivatives {
    /// `grad_weyl[a] = ∇_{e_a} W` as a pair matrix.
    pub grad_weyl: [Mat6; 4],
    /// `cotton[a][slot(b, c)] = C_abc`.
    pub cotton: [[f64; 6]; 4],
    /// `div_weyl[a][slot(b, c)] = (δW)_abc`.
    pub div_weyl: [[f64; 6]; 4],
    pub one_form_b: [f64; 4],
}

/// Every curvature field of a metric, immutable once built.
pub struct CurvatureBundle {
    metric: MetricField,
    points: Vec<PointCurvature>,
    derivatives: Vec<PointDerivatives>,
    lambda: LambdaFrame,
    warnings: Vec<String>,
}

/// Names accepted by [`CurvatureBundle::export`].
pub const BUNDLE_FIELDS: [&str; 15] = [
    "metric",
    "christoffel",
    "riemann",
    "ricci",
    "scalar",
    "tracefreeRicci",
    "schouten",
    "weyl",
    "weylPlus",
    "weylMinus",
    "cotton",
    "divWeyl",
    "normWeylPlus",
    "normWeylMinus",
    "oneFormB",
];

fn projector(lf: &LambdaFrame, chirality: Chirality) -> Mat6 {
    let s = lf.star_matrix();
    if chirality.is_plus() {
        (Mat6::identity() + s) * 0.5
    } else {
        (Mat6::identity() - s) * 0.5
    }
}

/// Pair-space matrix of the derivation induced by `G[m][i] = Γ^m_si`.
fn pair_derivation(g: &Mat4) -> Mat6 {
    let mut out = Mat6::zeros();
    for (col, &(i, j)) in PAIRS.iter().enumerate() {
        for m in 0..4 {
            if let Some((row, sign)) = pair_slot(m, j) {
                out[(row, col)] += sign * g[(m, i)];
            }
            if let Some((row, sign)) = pair_slot(i, m) {
                out[(row, col)] += sign * g[(m, j)];
            }
        }
    }
    out
}

fn pointwise(g: Mat4, dg: &[[f64; 10]; 4], ddg: &[[f64; 10]; 10], lf: &LambdaFrame) -> Result<PointCurvature> {
    let pf = PointFrame::new(g)?;
    let gi = *pf.inverse_metric();
    let d = |c: usize, i: usize, j: usize| dg[c][upper_slot(i, j)];
    let dd = |a: usize, b: usize, i: usize, j: usize| ddg[upper_slot(a, b)][upper_slot(i, j)];
    // Γ_{k,ij} = ½(∂_i g_kj + ∂_j g_ki - ∂_k g_ij)
    let mut lower = [Mat4::zeros(); 4];
    for (k, lk) in lower.iter_mut().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                lk[(i, j)] = 0.5 * (d(i, k, j) + d(j, k, i) - d(k, i, j));
            }
        }
    }
    let christoffel: [Mat4; 4] = std::array::from_fn(|m| {
        let mut s = Mat4::zeros();
        for k in 0..4 {
            s += lower[k] * gi[(m, k)];
        }
        s
    });
    // R_abcd = ½(g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac) + g_ef(Γ^e_bc Γ^f_ad - Γ^e_bd Γ^f_ac)
    let riemann = curvature_from_fn(|a, b, c, dd_| {
        let second = 0.5 * (dd(b, c, a, dd_) + dd(a, dd_, b, c) - dd(b, dd_, a, c) - dd(a, c, b, dd_));
        let mut quad = 0.0;
        for e in 0..4 {
            quad += lower[e][(a, dd_)] * christoffel[e][(b, c)] - lower[e][(a, c)] * christoffel[e][(b, dd_)];
        }
        second + quad
    });
    let ricci = ricci_contraction(&riemann, &gi);
    let scalar = (gi * ricci).trace();
    let tracefree_ricci = ricci - g * (scalar / 4.0);
    let schouten = (ricci - g * (scalar / 6.0)) * 0.5;
    let weyl = weyl_tensor_from_curvature(&riemann, &g, &gi);
    let weyl_frame = frame_transform(&weyl, pf.frame());
    let weyl_plus = restrict_to_chirality(&weyl_frame, lf, Chirality::Plus);
    let weyl_minus = restrict_to_chirality(&weyl_frame, lf, Chirality::Minus);
    Ok(PointCurvature {
        metric: g,
        inverse: gi,
        frame: *pf.frame(),
        coframe: *pf.coframe(),
        volume: pf.volume_factor(),
        christoffel,
        riemann,
        ricci,
        scalar,
        tracefree_ricci,
        schouten,
        weyl,
        weyl_frame,
        weyl_plus,
        weyl_minus,
        norm_weyl_plus: (4.0 * weyl_plus.norm_squared()).max(0.0).sqrt(),
        norm_weyl_minus: (4.0 * weyl_minus.norm_squared()).max(0.0).sqrt(),
    })
}

/// Compute the full bundle of `g`.
///
/// Metric components are differentiated spectrally; everything else is
/// formed pointwise, and `∇W`, `∇Ric`, `∇R` reuse spectral derivatives of
/// the already evaluated component fields plus pointwise Christoffel
/// corrections.
pub fn compute_curvature(g: &MetricField) -> Result<CurvatureBundle> {
    let spec = *g.spec();
    let n = spec.points();
    let sp = Spectral::new(&spec);
    let lf = LambdaFrame::standard();
    let mut warnings = Vec::new();

    let comps: Vec<Vec<f64>> = UPPER.iter().map(|&(i, j)| g.field().component(i * 4 + j)).collect();
    for (c, f) in comps.iter().enumerate() {
        let top = sp.top_mode_fraction(f);
        if top > 1e-10 {
            let msg = format!(
                "metric component g_{}{} has {top:.2e} of its energy on the Nyquist shell; results may be aliased",
                UPPER[c].0, UPPER[c].1
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let mut first: Vec<[Vec<f64>; 4]> = Vec::with_capacity(10);
    let mut second: Vec<[Vec<f64>; 10]> = Vec::with_capacity(10);
    for f in &comps {
        let (d1, d2) = sp.gradient_hessian(f);
        first.push(d1);
        second.push(d2);
    }
    drop(comps);

    let points = exec::map(n, |p| {
        let dg: [[f64; 10]; 4] = std::array::from_fn(|a| std::array::from_fn(|c| first[c][a][p]));
        let ddg: [[f64; 10]; 10] = std::array::from_fn(|ab| std::array::from_fn(|c| second[c][ab][p]));
        pointwise(g.at(p), &dg, &ddg, &lf)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    drop(first);
    drop(second);

    // Spectral gradients of the 21 independent Weyl entries, the 10 Ricci
    // entries and the scalar curvature.
    let mut w_grad: Vec<[Vec<f64>; 4]> = Vec::with_capacity(21);
    for a in 0..6 {
        for b in a..6 {
            let f: Vec<f64> = points.iter().map(|pc| pc.weyl[(a, b)]).collect();
            w_grad.push(sp.gradient(&f));
        }
    }
    let mut ric_grad: Vec<[Vec<f64>; 4]> = Vec::with_capacity(10);
    for &(i, j) in UPPER.iter() {
        let f: Vec<f64> = points.iter().map(|pc| pc.ricci[(i, j)]).collect();
        ric_grad.push(sp.gradient(&f));
    }
    let r_grad = sp.gradient(&points.iter().map(|pc| pc.scalar).collect::<Vec<_>>());

    let derivatives = exec::map(n, |p| {
        let pc = &points[p];
        let e = &pc.frame;
        let p6 = crate::algebra::pair_lift(e);
        let mut coord_grad = [Mat6::zeros(); 4];
        let mut ric_cov = [Mat4::zeros(); 4];
        for s in 0..4 {
            let mut dm = Mat6::zeros();
            let mut idx = 0;
            for a in 0..6 {
                for b in a..6 {
                    let v = w_grad[idx][s][p];
                    dm[(a, b)] = v;
                    dm[(b, a)] = v;
                    idx += 1;
                }
            }
            let gs = Mat4::from_fn(|m, i| pc.christoffel[m][(s, i)]);
            let gh = pair_derivation(&gs);
            coord_grad[s] = dm - gh.transpose() * pc.weyl - pc.weyl * gh;
            let dric = Mat4::from_fn(|i, j| ric_grad[upper_slot(i, j)][s][p]);
            ric_cov[s] = dric - gs.transpose() * pc.ricci - pc.ricci * gs;
        }
        let frame_coord: [Mat6; 4] = std::array::from_fn(|s| p6.transpose() * coord_grad[s] * p6);
        let grad_weyl: [Mat6; 4] = std::array::from_fn(|a| {
            let mut m = Mat6::zeros();
            for s in 0..4 {
                m += frame_coord[s] * e[(s, a)];
            }
            m
        });
        let dr = [r_grad[0][p], r_grad[1][p], r_grad[2][p], r_grad[3][p]];
        // C_ijk = R_ij,k - R_ik,j - (1/6)(R_k g_ij - R_j g_ik)
        let cot = |i: usize, j: usize, k: usize| {
            ric_cov[k][(i, j)] - ric_cov[j][(i, k)] - (dr[k] * pc.metric[(i, j)] - dr[j] * pc.metric[(i, k)]) / 6.0
        };
        let mut cc = [[[0.0f64; 4]; 4]; 4];
        for (i, ci) in cc.iter_mut().enumerate() {
            for (j, cij) in ci.iter_mut().enumerate() {
                for (k, c) in cij.iter_mut().enumerate() {
                    *c = cot(i, j, k);
                }
            }
        }
        let mut cotton = [[0.0; 6]; 4];
        for (a, row) in cotton.iter_mut().enumerate() {
            for (slot, &(b, c)) in PAIRS.iter().enumerate() {
                let mut s = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        for k in 0..4 {
                            s += e[(i, a)] * e[(j, b)] * e[(k, c)] * cc[i][j][k];
                        }
                    }
                }
                row[slot] = s;
            }
        }
        let mut div_weyl = [[0.0; 6]; 4];
        for (b, row) in div_weyl.iter_mut().enumerate() {
            for (slot, &(c, d)) in PAIRS.iter().enumerate() {
                row[slot] = (0..4).map(|a| curvature_entry(&grad_weyl[a], a, b, c, d)).sum();
            }
        }
        let mut bf = [0.0; 4];
        for (a, v) in bf.iter_mut().enumerate() {
            let mut s = 0.0;
            for (i, row) in div_weyl.iter().enumerate() {
                for (slot, &(j, k)) in PAIRS.iter().enumerate() {
                    s += 2.0 * curvature_entry(&pc.weyl_frame, a, i, j, k) * row[slot];
                }
            }
            *v = s;
        }
        let one_form_b = std::array::from_fn(|s| (0..4).map(|a| pc.coframe[(a, s)] * bf[a]).sum());
        PointDerivatives { grad_weyl, cotton, div_weyl, one_form_b }
    });

    Ok(CurvatureBundle { metric: g.clone(), points, derivatives, lambda: lf, warnings })
}

impl CurvatureBundle {
    pub fn spec(&self) -> &GridSpec {
        self.metric.spec()
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn family_id(&self) -> &str {
        self.metric.family().family_id()
    }

    pub fn points(&self) -> &[PointCurvature] {
        &self.points
    }

    pub fn point(&self, p: usize) -> &PointCurvature {
        &self.points[p]
    }

    pub fn derivatives(&self, p: usize) -> &PointDerivatives {
        &self.derivatives[p]
    }

    pub fn lambda_frame(&self) -> &LambdaFrame {
        &self.lambda
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Missing-field check used by consumers that need the derivative layer.
    pub fn require_complete(&self) -> Result<()> {
        if self.derivatives.len() != self.points.len() {
            return Err(Error::MissingField("derivative layer".into()));
        }
        Ok(())
    }

    pub fn volume(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.volume).collect()
    }

    pub fn total_volume(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// `∫ f dV` for a pointwise quantity.
    pub fn integrate<F: Fn(usize) -> f64 + Sync + Send>(&self, f: F) -> f64 {
        exec::sum(self.len(), |p| f(p) * self.points[p].volume) * self.spec().cell_volume()
    }

    /// `W±` as a 6×6 frame pair matrix.
    pub fn weyl_chiral_frame(&self, p: usize, chirality: Chirality) -> Mat6 {
        let q = self.lambda.orthonormal_columns(chirality.is_plus());
        let m = if chirality.is_plus() { &self.points[p].weyl_plus } else { &self.points[p].weyl_minus };
        q * m * q.transpose()
    }

    /// `∇_{e_a} W±` as frame pair matrices.
    pub fn grad_weyl_chiral(&self, p: usize, chirality: Chirality) -> [Mat6; 4] {
        let pr = projector(&self.lambda, chirality);
        self.derivatives[p].grad_weyl.map(|m| pr * m * pr)
    }

    /// `(δW±)_bcd`, frame components.
    pub fn div_weyl_chiral(&self, p: usize, chirality: Chirality) -> [[f64; 6]; 4] {
        let g = self.grad_weyl_chiral(p, chirality);
        let mut out = [[0.0; 6]; 4];
        for (b, row) in out.iter_mut().enumerate() {
            for (slot, &(c, d)) in PAIRS.iter().enumerate() {
                row[slot] = (0..4).map(|a| curvature_entry(&g[a], a, b, c, d)).sum();
            }
        }
        out
    }

    /// Coordinate `δW_ijk` (all lower indices) from the frame components.
    pub fn div_weyl_coordinates(&self, p: usize) -> [[f64; 6]; 4] {
        let th = &self.points[p].coframe;
        let dw = &self.derivatives[p].div_weyl;
        let mut out = [[0.0; 6]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (slot, &(j, k)) in PAIRS.iter().enumerate() {
                let mut s = 0.0;
                for a in 0..4 {
                    for (bs, &(b, c)) in PAIRS.iter().enumerate() {
                        s += th[(a, i)] * (th[(b, j)] * th[(c, k)] - th[(c, j)] * th[(b, k)]) * dw[a][bs];
                    }
                }
                row[slot] = s;
            }
        }
        out
    }

    pub fn norm_weyl_sq(&self, p: usize) -> f64 {
        4.0 * self.points[p].weyl_frame.norm_squared()
    }

    pub fn min_norm_weyl(&self) -> f64 {
        exec::min(self.len(), |p| self.norm_weyl_sq(p).max(0.0).sqrt())
    }

    pub fn max_norm_weyl(&self) -> f64 {
        exec::max(self.len(), |p| self.norm_weyl_sq(p).max(0.0).sqrt())
    }

    /// Export a named field (see [`BUNDLE_FIELDS`]) in coordinate
    /// components; `weylPlus/Minus`, `cotton` and `divWeyl` are exported in
    /// frame components.
    pub fn export(&self, name: &str) -> Result<Field> {
        let spec = *self.spec();
        let flat4 = |m: &Mat4| m.transpose().as_slice().to_vec();
        let full6 = |m: &Mat6| {
            let mut v = vec![0.0; 256];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            v[((i * 4 + j) * 4 + k) * 4 + l] = curvature_entry(m, i, j, k, l);
                        }
                    }
                }
            }
            v
        };
        let rank3 = |c: &[[f64; 6]; 4]| {
            let mut v = vec![0.0; 64];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        if let Some((s, sign)) = pair_slot(j, k) {
                            v[(i * 4 + j) * 4 + k] = sign * c[i][s];
                        }
                    }
                }
            }
            v
        };
        let q = |plus: bool| self.lambda.orthonormal_columns(plus);
        let (rank, per): (u32, Box<dyn Fn(usize) -> Vec<f64>>) = match name {
            "metric" => (2, Box::new(|p| flat4(&self.points[p].metric))),
            "christoffel" => (
                3,
                Box::new(|p| {
                    let c = &self.points[p].christoffel;
                    (0..64).map(|f| c[f / 16][((f / 4) % 4, f % 4)]).collect()
                }),
            ),
            "riemann" => (4, Box::new(|p| full6(&self.points[p].riemann))),
            "ricci" => (2, Box::new(|p| flat4(&self.points[p].ricci))),
            "scalar" => (0, Box::new(|p| vec![self.points[p].scalar])),
            "tracefreeRicci" => (2, Box::new(|p| flat4(&self.points[p].tracefree_ricci))),
            "schouten" => (2, Box::new(|p| flat4(&self.points[p].schouten))),
            "weyl" => (4, Box::new(|p| full6(&self.points[p].weyl))),
            "weylPlus" => {
                let qp = q(true);
                (4, Box::new(move |p| full6(&(qp * self.points[p].weyl_plus * qp.transpose()))))
            }
            "weylMinus" => {
                let qm: SMatrix<f64, 6, 3> = q(false);
                (4, Box::new(move |p| full6(&(qm * self.points[p].weyl_minus * qm.transpose()))))
            }
            "cotton" => (3, Box::new(|p| rank3(&self.derivatives[p].cotton))),
            "divWeyl" => (3, Box::new(|p| rank3(&self.derivatives[p].div_weyl))),
            "normWeylPlus" => (0, Box::new(|p| vec![self.points[p].norm_weyl_plus])),
            "normWeylMinus" => (0, Box::new(|p| vec![self.points[p].norm_weyl_minus])),
            "oneFormB" => (1, Box::new(|p| self.derivatives[p].one_form_b.to_vec())),
            other => return Err(Error::MissingField(format!("unknown bundle field {other}"))),
        };
        let mut data = Vec::with_capacity(spec.points() * 4usize.pow(rank));
        for p in 0..spec.points() {
            data.extend(per(p));
        }
        Field::new(spec, rank, data)
    }
}
