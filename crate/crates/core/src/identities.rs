//! Pointwise and integral identities of the curvature chain, evaluated on
//! computed bundles.
//!
//! Pointwise relative residuals divide the sup of the residual by the sup,
//! over the grid, of the largest term magnitude at each node. Integral
//! relative residuals divide by the largest term integral.

use crate::algebra::{cubic_contraction, curvature_entry, sigma2, Chirality, Mat6, PAIRS};
use crate::curvature::{compute_curvature, conformal_rescale, CurvatureBundle};
use crate::field::{Field, GridSpec, Spectral};
use crate::{exec, Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub identity_id: String,
    /// `None` for identities that only hold after integration.
    pub pointwise_max_residual: Option<f64>,
    pub pointwise_rel_residual: Option<f64>,
    pub integral_residual: f64,
    pub integral_rel_residual: f64,
    /// Integrals of the individual terms, keyed by name.
    pub integrals: BTreeMap<String, f64>,
    pub grid_spec: GridSpec,
    pub metric_family: String,
}

impl IdentityReport {
    pub fn integral(&self, key: &str) -> f64 {
        self.integrals.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Which Weyl tensor an identity is evaluated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeylPart {
    Full,
    Plus,
    Minus,
}

impl WeylPart {
    pub const ALL: [WeylPart; 3] = [WeylPart::Full, WeylPart::Plus, WeylPart::Minus];

    pub fn suffix(self) -> &'static str {
        match self {
            WeylPart::Full => "",
            WeylPart::Plus => "+",
            WeylPart::Minus => "-",
        }
    }

    fn chirality(self) -> Option<Chirality> {
        match self {
            WeylPart::Full => None,
            WeylPart::Plus => Some(Chirality::Plus),
            WeylPart::Minus => Some(Chirality::Minus),
        }
    }
}

/// Pointwise frame data of `W`, `W+` or `W-`.
pub(crate) struct PartData {
    pub w: Mat6,
    pub grad: [Mat6; 4],
    pub div: [[f64; 6]; 4],
}

pub(crate) fn part_data(b: &CurvatureBundle, p: usize, part: WeylPart) -> PartData {
    match part.chirality() {
        None => PartData {
            w: b.point(p).weyl_frame,
            grad: b.derivatives(p).grad_weyl,
            div: b.derivatives(p).div_weyl,
        },
        Some(c) => PartData {
            w: b.weyl_chiral_frame(p, c),
            grad: b.grad_weyl_chiral(p, c),
            div: b.div_weyl_chiral(p, c),
        },
    }
}

pub(crate) fn grad_norm_sq(g: &[Mat6; 4]) -> f64 {
    4.0 * g.iter().map(|m| m.norm_squared()).sum::<f64>()
}

pub(crate) fn three_norm_sq(d: &[[f64; 6]; 4]) -> f64 {
    2.0 * d.iter().flat_map(|r| r.iter()).map(|x| x * x).sum::<f64>()
}

/// `W_ijkl,t W_ijkt,l` in an orthonormal frame.
fn cross_contraction(g: &[Mat6; 4]) -> f64 {
    let mut s = 0.0;
    for t in 0..4 {
        for l in 0..4 {
            for k in 0..4 {
                for &(i, j) in PAIRS.iter() {
                    s += 2.0 * curvature_entry(&g[t], i, j, k, l) * curvature_entry(&g[l], i, j, k, t);
                }
            }
        }
    }
    s
}

/// `Y_a = T_abcd S_bcd` for a pair matrix `T` and `S[b][slot(cd)]`.
fn contract_with_three(w: &Mat6, s: &[[f64; 6]; 4]) -> [f64; 4] {
    std::array::from_fn(|a| {
        let mut v = 0.0;
        for (b, row) in s.iter().enumerate() {
            for (slot, &(c, d)) in PAIRS.iter().enumerate() {
                v += 2.0 * curvature_entry(w, a, b, c, d) * row[slot];
            }
        }
        v
    })
}

/// `Δf = (1/√g) ∂_i(√g g^ij ∂_j f)`.
pub(crate) fn laplacian(b: &CurvatureBundle, sp: &Spectral, f: &[f64]) -> Vec<f64> {
    let grad = sp.gradient(f);
    let flux: Vec<Vec<f64>> = (0..4)
        .map(|i| {
            exec::map(b.len(), |p| {
                let pc = b.point(p);
                pc.volume * (0..4).map(|j| pc.inverse[(i, j)] * grad[j][p]).sum::<f64>()
            })
        })
        .collect();
    let div = sp.divergence([&flux[0], &flux[1], &flux[2], &flux[3]]);
    exec::map(b.len(), |p| div[p] / b.point(p).volume)
}

/// `∇^i Y_i = (1/√g) ∂_i(√g g^ij Y_j)` for a coordinate one-form.
pub(crate) fn divergence_one_form(b: &CurvatureBundle, sp: &Spectral, y: &[[f64; 4]]) -> Vec<f64> {
    let flux: Vec<Vec<f64>> = (0..4)
        .map(|i| {
            exec::map(b.len(), |p| {
                let pc = b.point(p);
                pc.volume * (0..4).map(|j| pc.inverse[(i, j)] * y[p][j]).sum::<f64>()
            })
        })
        .collect();
    let div = sp.divergence([&flux[0], &flux[1], &flux[2], &flux[3]]);
    exec::map(b.len(), |p| div[p] / b.point(p).volume)
}

fn frame_to_coordinates(b: &CurvatureBundle, p: usize, y: [f64; 4]) -> [f64; 4] {
    let th = &b.point(p).coframe;
    std::array::from_fn(|s| (0..4).map(|a| th[(a, s)] * y[a]).sum())
}

struct Assembly {
    id: String,
    /// Per point: signed term values; the residual is their sum.
    terms: Vec<Vec<f64>>,
    names: Vec<&'static str>,
    /// Indices of terms that enter the integral identity (with their sign).
    integral_terms: Vec<usize>,
    pointwise: bool,
}

fn finish(b: &CurvatureBundle, a: Assembly) -> IdentityReport {
    let n = b.len();
    let k = a.names.len();
    let residual = |p: usize| a.terms[p].iter().sum::<f64>();
    let (pmax, prel) = if a.pointwise {
        let rmax = exec::max(n, |p| residual(p).abs());
        let scale = exec::max(n, |p| a.terms[p].iter().fold(0.0f64, |m, t| m.max(t.abs())));
        (Some(rmax), Some(if scale > 0.0 { rmax / scale } else { rmax }))
    } else {
        (None, None)
    };
    let mut integrals = BTreeMap::new();
    let mut total = 0.0;
    let mut scale: f64 = 0.0;
    for t in 0..k {
        let v = b.integrate(|p| a.terms[p][t]);
        integrals.insert(a.names[t].to_string(), v);
        if a.integral_terms.contains(&t) {
            total += v;
            scale = scale.max(v.abs());
        }
    }
    let integral_residual = total.abs();
    IdentityReport {
        identity_id: a.id,
        pointwise_max_residual: pmax,
        pointwise_rel_residual: prel,
        integral_residual,
        integral_rel_residual: if scale > 0.0 { integral_residual / scale } else { integral_residual },
        integrals,
        grid_spec: *b.spec(),
        metric_family: b.family_id().to_string(),
    }
}

/// `W_ijkl,t W_ijkt,l = ½|∇W|² - |δW|²` for `W`, `W+`, `W-`.
pub fn weyl_gradient_identity(b: &CurvatureBundle) -> Result<Vec<IdentityReport>> {
    b.require_complete()?;
    Ok(WeylPart::ALL
        .iter()
        .map(|&part| {
            let terms = exec::map(b.len(), |p| {
                let d = part_data(b, p, part);
                vec![cross_contraction(&d.grad), -0.5 * grad_norm_sq(&d.grad), three_norm_sq(&d.div)]
            });
            finish(
                b,
                Assembly {
                    id: format!("weylGradient{}", part.suffix()),
                    terms,
                    names: vec!["crossContraction", "minusHalfGradSq", "divSq"],
                    integral_terms: vec![0, 1, 2],
                    pointwise: true,
                },
            )
        })
        .collect())
}

/// `½Δ|W|² = |∇W|² - 4|δW|² + ½R|W|² - 3W³ - 2(W_ijkl C_jkl)_i` pointwise,
/// and the integral identity without the divergence, for `W`, `W+`, `W-`.
/// The chiral versions use `C± = -2 δW±`.
pub fn weitzenboeck_residual(b: &CurvatureBundle) -> Result<Vec<IdentityReport>> {
    b.require_complete()?;
    let sp = Spectral::new(b.spec());
    let mut out = Vec::with_capacity(3);
    for part in WeylPart::ALL {
        let norm_sq = exec::map(b.len(), |p| 4.0 * part_data(b, p, part).w.norm_squared());
        let lap = laplacian(b, &sp, &norm_sq);
        let y = exec::map(b.len(), |p| {
            let d = part_data(b, p, part);
            let c = match part {
                WeylPart::Full => b.derivatives(p).cotton,
                _ => d.div.map(|r| r.map(|x| -2.0 * x)),
            };
            frame_to_coordinates(b, p, contract_with_three(&d.w, &c))
        });
        let divy = divergence_one_form(b, &sp, &y);
        let terms = exec::map(b.len(), |p| {
            let d = part_data(b, p, part);
            let r = b.point(p).scalar;
            vec![
                grad_norm_sq(&d.grad),
                -4.0 * three_norm_sq(&d.div),
                0.5 * r * norm_sq[p],
                -3.0 * cubic_contraction(&d.w),
                -2.0 * divy[p],
                -0.5 * lap[p],
            ]
        });
        out.push(finish(
            b,
            Assembly {
                id: format!("weitzenboeck{}", part.suffix()),
                terms,
                names: vec!["gradSq", "minusFourDivSq", "halfScalarNormSq", "minusThreeCubic", "minusTwoDivergence", "minusHalfLaplacian"],
                integral_terms: vec![0, 1, 2, 3],
                pointwise: true,
            },
        ));
    }
    Ok(out)
}

/// `T_tl = W±_ijkt W±_ijkl - ¼|W±|² g_tl` on the grid, scaled by the sup
/// of `¼|W±|²`.
pub fn contraction_identity(b: &CurvatureBundle) -> Vec<IdentityReport> {
    [WeylPart::Plus, WeylPart::Minus]
        .iter()
        .map(|&part| {
            let n = b.len();
            let rmax = exec::max(n, |p| crate::algebra::contract_ww_matrix(&part_data(b, p, part).w).residual);
            let scale = exec::max(n, |p| part_data(b, p, part).w.norm_squared());
            IdentityReport {
                identity_id: format!("contractWW{}", part.suffix()),
                pointwise_max_residual: Some(rmax),
                pointwise_rel_residual: Some(if scale > 0.0 { rmax / scale } else { rmax }),
                integral_residual: 0.0,
                integral_rel_residual: 0.0,
                integrals: BTreeMap::new(),
                grid_spec: *b.spec(),
                metric_family: b.family_id().to_string(),
            }
        })
        .collect()
}

/// Chern–Gauss–Bonnet and signature integrands (both integrate to zero on
/// the torus), the two forms of `96∫σ₂`, and the combination of the two
/// formulas relating `8∫σ₂` and `∫|W±|²`.
///
/// `sigma2Combination±` is the relation in the form `8∫σ₂ = ∫|W±|²`, which
/// on the torus only holds when `W±` vanishes in `L²`. Combining the two
/// topological formulas gives `8∫σ₂ = -∫|W±|² + 8π²(2χ ± 3τ)`; that form
/// is `sigma2CombinationCorrected±`.
pub fn gauss_bonnet_signature(b: &CurvatureBundle) -> Result<Vec<IdentityReport>> {
    let per = exec::map(b.len(), |p| {
        let pc = b.point(p);
        let wp = pc.norm_weyl_plus * pc.norm_weyl_plus;
        let wm = pc.norm_weyl_minus * pc.norm_weyl_minus;
        let ric0 = (pc.inverse * pc.tracefree_ricci * pc.inverse * pc.tracefree_ricci).trace();
        let s2 = sigma2(&pc.schouten, &pc.metric).unwrap_or(f64::NAN);
        (wp, wm, ric0, pc.scalar * pc.scalar, s2)
    });
    if per.iter().any(|t| t.4.is_nan()) {
        return Err(Error::InvalidMetric("σ₂ evaluation failed".into()));
    }
    let mk = |id: &str, names: Vec<&'static str>, f: &dyn Fn(&(f64, f64, f64, f64, f64)) -> Vec<f64>| {
        finish(
            b,
            Assembly {
                id: id.to_string(),
                terms: per.iter().map(f).collect(),
                integral_terms: (0..names.len()).collect(),
                names,
                pointwise: false,
            },
        )
    };
    Ok(vec![
        mk("gaussBonnet", vec!["normWeylPlusSq", "normWeylMinusSq", "minusTwoTracefreeRicciSq", "scalarSqOverSix"], &|t| {
            vec![t.0, t.1, -2.0 * t.2, t.3 / 6.0]
        }),
        mk("signature", vec!["normWeylPlusSq", "minusNormWeylMinusSq"], &|t| vec![t.0, -t.1]),
        mk("gurskyForms", vec!["ninetySixSigma2", "minusScalarSq", "twelveTracefreeRicciSq"], &|t| {
            vec![96.0 * t.4, -t.3, 12.0 * t.2]
        }),
        mk("sigma2Combination+", vec!["eightSigma2", "minusNormWeylPlusSq"], &|t| vec![8.0 * t.4, -t.0]),
        mk("sigma2Combination-", vec!["eightSigma2", "minusNormWeylMinusSq"], &|t| vec![8.0 * t.4, -t.1]),
        mk("sigma2CombinationCorrected+", vec!["eightSigma2", "normWeylPlusSq"], &|t| vec![8.0 * t.4, t.0]),
        mk("sigma2CombinationCorrected-", vec!["eightSigma2", "normWeylMinusSq"], &|t| vec![8.0 * t.4, t.1]),
    ])
}

/// Conformal invariance of `∫|W±|² dV` and `∫σ₂ dV` under `g ↦ e^{2u} g`.
pub fn conformal_invariants(b: &CurvatureBundle, u: &Field) -> Result<Vec<IdentityReport>> {
    let gt = conformal_rescale(b.metric(), u)?;
    let bt = compute_curvature(&gt)?;
    let functionals = |bb: &CurvatureBundle| -> Result<[f64; 3]> {
        let wp = bb.integrate(|p| bb.point(p).norm_weyl_plus.powi(2));
        let wm = bb.integrate(|p| bb.point(p).norm_weyl_minus.powi(2));
        let s2 = exec::map(bb.len(), |p| sigma2(&bb.point(p).schouten, &bb.point(p).metric))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        Ok([wp, wm, bb.integrate(|p| s2[p])])
    };
    let a = functionals(b)?;
    let c = functionals(&bt)?;
    let names = ["weylL2Plus", "weylL2Minus", "sigma2Integral"];
    Ok((0..3)
        .map(|k| {
            let diff = (a[k] - c[k]).abs();
            let scale = a[k].abs().max(c[k].abs());
            let mut integrals = BTreeMap::new();
            integrals.insert("original".to_string(), a[k]);
            integrals.insert("rescaled".to_string(), c[k]);
            IdentityReport {
                identity_id: format!("conformalInvariance.{}", names[k]),
                pointwise_max_residual: None,
                pointwise_rel_residual: None,
                integral_residual: diff,
                integral_rel_residual: if scale > 0.0 { diff / scale } else { diff },
                integrals,
                grid_spec: *b.spec(),
                metric_family: b.family_id().to_string(),
            }
        })
        .collect())
}

/// `𝔇(v)` from the coefficients of `g₀`:
/// `(∫v⁻⁴dV)^{1/2} ∫(¼|W|²|∇v|² + |δW|² v² - ⟨B, ∇(v²)⟩) dV`.
pub fn d_functional_conformal_factor(b: &CurvatureBundle, v: &Field) -> Result<f64> {
    if v.rank() != 0 || v.spec() != b.spec() {
        return Err(Error::ShapeError("v must be a scalar field on the bundle grid".into()));
    }
    if v.min() <= 0.0 {
        return Err(Error::InvalidConformalFactor(format!("min v = {}", v.min())));
    }
    let sp = Spectral::new(b.spec());
    let vd = v.data();
    let dv = sp.gradient(vd);
    let v2: Vec<f64> = vd.iter().map(|x| x * x).collect();
    let dv2 = sp.gradient(&v2);
    let inv4 = b.integrate(|p| vd[p].powi(-4));
    let body = b.integrate(|p| {
        let pc = b.point(p);
        let d = b.derivatives(p);
        let a = 0.25 * b.norm_weyl_sq(p);
        let c0 = three_norm_sq(&d.div_weyl);
        let mut grad2 = 0.0;
        let mut bdot = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                grad2 += pc.inverse[(i, j)] * dv[i][p] * dv[j][p];
                bdot += pc.inverse[(i, j)] * d.one_form_b[i] * dv2[j][p];
            }
        }
        a * grad2 + c0 * v2[p] - bdot
    });
    Ok(inv4.sqrt() * body)
}

/// `𝔇(g) = Vol^{1/2} ∫|δW|² dV` from a bundle.
pub fn d_functional_direct(b: &CurvatureBundle) -> f64 {
    b.total_volume().sqrt() * b.integrate(|p| three_norm_sq(&b.derivatives(p).div_weyl))
}

/// Compare [`d_functional_conformal_factor`] on `g₀` with
/// [`d_functional_direct`] on the bundle of `v⁻² g₀`.
pub fn d_functional_consistency(b: &CurvatureBundle, v: &Field) -> Result<IdentityReport> {
    let via_formula = d_functional_conformal_factor(b, v)?;
    let u = Field::scalar(*v.spec(), v.data().iter().map(|x| -x.ln()).collect())?;
    let bt = compute_curvature(&conformal_rescale(b.metric(), &u)?)?;
    let direct = d_functional_direct(&bt);
    let diff = (via_formula - direct).abs();
    let scale = via_formula.abs().max(direct.abs());
    let mut integrals = BTreeMap::new();
    integrals.insert("conformalFactorFormula".to_string(), via_formula);
    integrals.insert("directBundle".to_string(), direct);
    Ok(IdentityReport {
        identity_id: "dFunctionalConsistency".into(),
        pointwise_max_residual: None,
        pointwise_rel_residual: None,
        integral_residual: diff,
        integral_rel_residual: if scale > 0.0 { diff / scale } else { diff },
        integrals,
        grid_spec: *b.spec(),
        metric_family: b.family_id().to_string(),
    })
}

/// Every bundle-only identity of this module.
pub fn all_identities(b: &CurvatureBundle) -> Result<Vec<IdentityReport>> {
    let mut v = weyl_gradient_identity(b)?;
    v.extend(weitzenboeck_residual(b)?);
    v.extend(contraction_identity(b));
    v.extend(gauss_bonnet_signature(b)?);
    Ok(v)
}
