use super::descent::{is_degenerate, MinimizeResult};
use super::eigen::SpectralResult;
use super::operator::EllipticOperator;
use crate::curvature::{compute_curvature, conformal_rescale, CurvatureBundle};
use crate::field::{Field, MetricField, Spectral};
use crate::identities::{grad_norm_sq, laplacian, part_data, three_norm_sq, WeylPart};
use crate::{algebra::cubic_contraction, exec, Error, Result};
use serde::Serialize;

/// Relative tolerance of the two-sided bound and the sandwich.
pub const BOUNDS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub lambda1: f64,
    pub volume: f64,
    pub d_hat: f64,
    /// `Vol^{-1/2} λ₁`.
    pub lower: f64,
    /// `λ₁ (∫φ₁²)(∫φ₁⁻⁴)^{1/2} = 𝔇(φ₁)`, the scale-invariant upper bound.
    pub upper: f64,
    /// `λ₁ (∫φ₁²)/(∫φ₁⁻⁴)^{1/2}`, the quotient form. It is not invariant under
    /// `φ₁ ↦ tφ₁` and is reported for comparison only.
    pub upper_quotient_form: f64,
    pub upper_quotient_slack: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
    pub l_min: f64,
    pub l_max: f64,
    /// `(l/l̄)(𝒟̂/λ₁)^{1/6}` and `(l̄/l)(𝒟̂/λ₁)^{1/6}`.
    pub sandwich: (f64, f64),
    /// Range of `v (∫v⁻⁴)^{1/4}` on the grid.
    pub scaled_range: (f64, f64),
    pub sandwich_lower_slack: f64,
    pub sandwich_upper_slack: f64,
    pub passed: bool,
}

/// Two-sided estimate of `𝒟` by `λ₁` and the pointwise sandwich of the
/// normalized minimizer. Slacks are relative; negative beyond
/// [`BOUNDS_TOL`] fails. `passed` does not look at the quotient form.
pub fn bounds_report(spec: &SpectralResult, res: &MinimizeResult, op: &EllipticOperator) -> Result<BoundsReport> {
    if res.degenerate || is_degenerate(op, spec.lambda1) {
        return Err(Error::DegenerateOperator(format!("λ₁ = {:e}: bounds do not apply on the 𝒟 = 0 branch", spec.lambda1)));
    }
    let phi = spec.phi1.data();
    let lambda1 = spec.lambda1;
    let volume = op.total_volume();
    let phi2: Vec<f64> = phi.iter().map(|x| x * x).collect();
    let phim4: Vec<f64> = phi.iter().map(|x| x.powi(-4)).collect();
    let lower = lambda1 / volume.sqrt();
    let upper = op.integrate(&phi2) * op.integrate(&phim4).sqrt() * lambda1;
    let upper_quotient_form = op.integrate(&phi2) / op.integrate(&phim4).sqrt() * lambda1;
    let d_hat = res.d_hat;
    let v = res.v.data();
    let vm4: Vec<f64> = v.iter().map(|x| x.powi(-4)).collect();
    let s = op.integrate(&vm4).powf(0.25);
    let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
    let (l, lbar) = (spec.l_min(), spec.l_max());
    let root = (d_hat / lambda1).powf(1.0 / 6.0);
    let sandwich = (l / lbar * root, lbar / l * root);
    let smin = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lower_slack = (d_hat - lower) / d_hat.abs();
    let upper_slack = (upper - d_hat) / d_hat.abs();
    let upper_quotient_slack = (upper_quotient_form - d_hat) / d_hat.abs();
    let sandwich_lower_slack = (smin - sandwich.0) / smin;
    let sandwich_upper_slack = (sandwich.1 - smax) / smax;
    let passed = [lower_slack, upper_slack, sandwich_lower_slack, sandwich_upper_slack].iter().all(|&x| x >= -BOUNDS_TOL);
    Ok(BoundsReport {
        lambda1,
        volume,
        d_hat,
        lower,
        upper,
        upper_quotient_form,
        upper_quotient_slack,
        lower_slack,
        upper_slack,
        l_min: l,
        l_max: lbar,
        sandwich,
        scaled_range: (smin, smax),
        sandwich_lower_slack,
        sandwich_upper_slack,
        passed,
    })
}

/// [`bounds_report`], failing with `BoundViolation` when a bound is broken.
pub fn bounds_check(spec: &SpectralResult, res: &MinimizeResult, op: &EllipticOperator) -> Result<BoundsReport> {
    let r = bounds_report(spec, res, op)?;
    if !r.passed {
        return Err(Error::BoundViolation(format!("{r:?}")));
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WeakHarmonicReport {
    pub max_residual: f64,
    /// `max_residual` over the sup of the largest term.
    pub relative_residual: f64,
    pub mean_div_weyl_sq: f64,
    pub family_id: String,
}

/// Residual of `½Δ|W|² = |∇W|² + ½R|W|² - 3W³ - 8|δW|² + (4/Vol)∫|δW|²`
/// on a computed bundle.
pub fn weak_harmonic_residual_bundle(b: &CurvatureBundle) -> Result<WeakHarmonicReport> {
    b.require_complete()?;
    let sp = Spectral::new(b.spec());
    let norm_sq = exec::map(b.len(), |p| b.norm_weyl_sq(p));
    let lap = laplacian(b, &sp, &norm_sq);
    let mean = b.integrate(|p| three_norm_sq(&b.derivatives(p).div_weyl)) / b.total_volume();
    let terms = exec::map(b.len(), |p| {
        let d = part_data(b, p, WeylPart::Full);
        [
            grad_norm_sq(&d.grad),
            0.5 * b.point(p).scalar * norm_sq[p],
            -3.0 * cubic_contraction(&d.w),
            -8.0 * three_norm_sq(&d.div),
            4.0 * mean,
            -0.5 * lap[p],
        ]
    });
    let max_residual = exec::max(b.len(), |p| terms[p].iter().sum::<f64>().abs());
    let scale = exec::max(b.len(), |p| terms[p].iter().fold(0.0f64, |m, t| m.max(t.abs())));
    Ok(WeakHarmonicReport {
        max_residual,
        relative_residual: if scale > 0.0 { max_residual / scale } else { max_residual },
        mean_div_weyl_sq: mean,
        family_id: b.family_id().to_string(),
    })
}

/// Build `g = v⁻² g₀`, recompute its bundle and evaluate the weak harmonic
/// Weyl residual in `g`.
pub fn weak_harmonic_residual(g0: &MetricField, v: &Field) -> Result<WeakHarmonicReport> {
    if v.rank() != 0 || v.spec() != g0.spec() {
        return Err(Error::ShapeError("v must be a scalar field on the metric grid".into()));
    }
    if v.min() <= 0.0 {
        return Err(Error::InvalidConformalFactor(format!("min v = {}", v.min())));
    }
    let u = Field::scalar(*v.spec(), v.data().iter().map(|x| -x.ln()).collect())?;
    let b = compute_curvature(&conformal_rescale(g0, &u)?)?;
    weak_harmonic_residual_bundle(&b)
}

impl EllipticOperator {
    /// [`weak_harmonic_residual`] for the background metric of a geometric
    /// operator.
    pub fn weak_harmonic_residual(&self, v: &Field) -> Result<WeakHarmonicReport> {
        match self.metric() {
            Some(g0) => weak_harmonic_residual(g0, v),
            None => Err(Error::NotGeometric),
        }
    }
}
