use super::bundle::{compute_curvature, CurvatureBundle};
use crate::algebra::{curvature_entry, PAIRS};
use crate::field::{Field, MetricFamily, MetricField, Spectral};
use crate::{exec, Error, Result};

/// `e^{2u} g` pointwise.
pub fn conformal_rescale(g: &MetricField, u: &Field) -> Result<MetricField> {
    if u.rank() != 0 || u.spec() != g.spec() {
        return Err(Error::ShapeError("conformal factor must be a scalar field on the metric's grid".into()));
    }
    let data: Vec<f64> = (0..g.spec().points())
        .flat_map(|p| {
            let s = (2.0 * u.data()[p]).exp();
            g.field().at(p).iter().map(move |x| x * s).collect::<Vec<_>>()
        })
        .collect();
    let family = MetricFamily::Derived {
        id: "conformalRescale".into(),
        params: serde_json::json!({ "base": g.family().family_id(), "baseParams": g.family().params() }),
    };
    MetricField::new(Field::new(*g.spec(), 2, data)?, family)
}

/// Residual of `e^{3u} δ̃W̃ = δW + ι_{∇u} W`.
#[derive(Clone, Debug)]
pub struct DivWeylTransform {
    /// Pointwise max over components of the residual.
    pub residual: Field,
    pub max_abs: f64,
    /// `max_abs` divided by the largest right-hand side entry.
    pub max_rel: f64,
}

/// Recompute `δW̃` from the bundle of `e^{2u} g` and compare with the
/// transformation law applied to the quantities of `bundle`. Both sides are
/// taken in the respective Cholesky frames, which differ exactly by `e^{-u}`.
pub fn div_weyl_transform(bundle: &CurvatureBundle, u: &Field) -> Result<DivWeylTransform> {
    bundle.require_complete()?;
    let gt = conformal_rescale(bundle.metric(), u)?;
    let tilde = compute_curvature(&gt)?;
    let sp = Spectral::new(bundle.spec());
    let du = sp.gradient(u.data());
    let n = bundle.len();
    let pairs = exec::map(n, |p| {
        let pc = bundle.point(p);
        let dw = &bundle.derivatives(p).div_weyl;
        let dwt = &tilde.derivatives(p).div_weyl;
        let du_frame: [f64; 4] = std::array::from_fn(|a| (0..4).map(|s| pc.frame[(s, a)] * du[s][p]).sum());
        let scale = (3.0 * u.data()[p]).exp();
        let mut res: f64 = 0.0;
        let mut rhs_max: f64 = 0.0;
        for b in 0..4 {
            for (slot, &(c, d)) in PAIRS.iter().enumerate() {
                let rhs = dw[b][slot] + (0..4).map(|a| du_frame[a] * curvature_entry(&pc.weyl_frame, a, b, c, d)).sum::<f64>();
                res = res.max((scale * dwt[b][slot] - rhs).abs());
                rhs_max = rhs_max.max(rhs.abs());
            }
        }
        (res, rhs_max)
    });
    let max_abs = pairs.iter().fold(0.0f64, |m, r| m.max(r.0));
    let scale = pairs.iter().fold(0.0f64, |m, r| m.max(r.1));
    let residual = Field::scalar(*bundle.spec(), pairs.iter().map(|r| r.0).collect())?;
    let max_rel = if scale > 0.0 { max_abs / scale } else { max_abs };
    Ok(DivWeylTransform { residual, max_abs, max_rel })
}
