//! Riemannian functionals of a computed metric and the pinching diagnostics
//! built on them.
//!
//! The Yamabe value is always a test-function value, so it only bounds
//! `𝒴(M,[g])` from above. Hypotheses that would need a lower bound are
//! reported as [`HypothesisStatus::Undetermined`].

use crate::algebra::{sigma2, Chirality};
use crate::curvature::CurvatureBundle;
use crate::field::{GridSpec, Spectral};
use crate::identities::{laplacian, three_norm_sq};
use crate::solver::solve_spd;
use crate::{exec, Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Upper end of the admissible `α` range.
pub const ALPHA_MAX: f64 = 5.0 / 9.0;

pub const SCHEMA_VERSION: u32 = 1;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=ALPHA_MAX).contains(&alpha) {
        return Err(Error::OutOfRange(format!("α = {alpha} outside [0, 5/9]")));
    }
    Ok(())
}

/// The α-independent integrals of `𝔇α±`.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChiralIntegrals {
    pub volume: f64,
    /// `∫|δW±|² dV`
    pub div_weyl_sq: f64,
    /// `∫R|W±|² dV`
    pub scalar_weyl_sq: f64,
    /// `𝒲± = ∫|W±|² dV`
    pub weyl_sq: f64,
}

impl ChiralIntegrals {
    pub fn new(b: &CurvatureBundle, sign: Chirality) -> Self {
        let w2 = |p: usize| {
            let pc = b.point(p);
            let w = if sign.is_plus() { pc.norm_weyl_plus } else { pc.norm_weyl_minus };
            w * w
        };
        ChiralIntegrals {
            volume: b.total_volume(),
            div_weyl_sq: b.integrate(|p| three_norm_sq(&b.div_weyl_chiral(p, sign))),
            scalar_weyl_sq: b.integrate(|p| b.point(p).scalar * w2(p)),
            weyl_sq: b.integrate(w2),
        }
    }

    pub fn d_alpha(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.volume.sqrt() * (self.div_weyl_sq - (5.0 - 9.0 * alpha) / 24.0 * self.scalar_weyl_sq))
    }

    /// `d𝔇α±/dα = (3/8) Vol^{1/2} ∫R|W±|²`.
    pub fn slope(&self) -> f64 {
        0.375 * self.volume.sqrt() * self.scalar_weyl_sq
    }

    /// `𝔇± = Vol^{1/2} ∫|δW±|²`.
    pub fn d_plain(&self) -> f64 {
        self.volume.sqrt() * self.div_weyl_sq
    }
}

/// `𝔇α±(g) = Vol^{1/2}(∫|δW±|² - ((5 - 9α)/24) ∫R|W±|²)`.
pub fn d_alpha(b: &CurvatureBundle, alpha: f64, sign: Chirality) -> Result<f64> {
    check_alpha(alpha)?;
    ChiralIntegrals::new(b, sign).d_alpha(alpha)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct YamabeBound {
    pub value: f64,
    /// Quotient of the constant test function, `∫R dV / Vol^{1/2}`.
    pub constant_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Quotient after each accepted step, starting from `u = 1`.
    pub history: Vec<f64>,
}

struct Yamabe<'a> {
    b: &'a CurvatureBundle,
    sp: Spectral,
    weight: Vec<f64>,
}

impl Yamabe<'_> {
    fn integrate(&self, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        self.b.integrate(f)
    }

    /// `(E, N) = (∫|∇u|² + (1/6)∫Ru², ∫u⁴)`.
    fn parts(&self, u: &[f64]) -> (f64, f64) {
        let g = self.sp.gradient(u);
        let e = self.integrate(|p| {
            let pc = self.b.point(p);
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += pc.inverse[(i, j)] * g[i][p] * g[j][p];
                }
            }
            s + pc.scalar * u[p] * u[p] / 6.0
        });
        (e, self.integrate(|p| u[p].powi(4)))
    }

    fn quotient(&self, u: &[f64]) -> f64 {
        let (e, n) = self.parts(u);
        6.0 * e / n.sqrt()
    }

    /// L² gradient of the quotient.
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let (e, n) = self.parts(u);
        let lap = laplacian(self.b, &self.sp, u);
        exec::map(u.len(), |p| {
            let r = self.b.point(p).scalar;
            12.0 * ((-lap[p] + r * u[p] / 6.0) / n.sqrt() - e * u[p].powi(3) / n.powf(1.5))
        })
    }

    /// `(1 - Δ)⁻¹ f`, the Sobolev gradient.
    fn smooth(&self, f: &[f64]) -> Result<Vec<f64>> {
        let spec = self.b.spec();
        let n = spec.n();
        let k2: [f64; 4] = std::array::from_fn(|a| {
            let l = spec.periods()[a];
            (1..n / 2).map(|m| 2.0 * (2.0 * PI * m as f64 / l).powi(2)).sum::<f64>() / n as f64
        });
        let diag = exec::map(self.b.len(), |p| {
            let gi = &self.b.point(p).inverse;
            1.0 + (0..4).map(|i| gi[(i, i)] * k2[i]).sum::<f64>()
        });
        let apply = |v: &[f64]| {
            let lap = laplacian(self.b, &self.sp, v);
            exec::map(v.len(), |p| v[p] - lap[p])
        };
        let mut x = vec![0.0; f.len()];
        solve_spd(apply, f, &diag, &self.weight, &mut x, 1e-10, 5_000)?;
        Ok(x)
    }
}

/// Gradient descent on the Yamabe quotient
/// `6(∫|∇u|² + (1/6)∫Ru²)/(∫u⁴)^{1/2}` from `u = 1`, with the Sobolev
/// gradient, backtracking, and `u` kept positive. The result never exceeds
/// the constant-function value. Not converging is not an error here: the
/// value reached is still an upper bound.
pub fn yamabe_descent(b: &CurvatureBundle, iterations: usize) -> Result<YamabeBound> {
    b.require_complete()?;
    let y = Yamabe { b, sp: Spectral::new(b.spec()), weight: b.volume() };
    let mut u = vec![1.0; b.len()];
    let mut q = y.quotient(&u);
    let constant_value = q;
    let mut history = vec![q];
    let mut step = 1.0;
    let mut converged = false;
    let mut it = 0;
    while it < iterations {
        let g = y.gradient(&u);
        let d = y.smooth(&g)?;
        let slope: f64 = exec::sum(u.len(), |p| g[p] * d[p] * y.weight[p]) * b.spec().cell_volume();
        let scale = q.abs().max(1e-300);
        if !(slope > 1e-24 * scale) {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(x, dx)| x - step * dx).collect();
            if trial.iter().all(|&x| x > 0.0) {
                let qt = y.quotient(&trial);
                if qt <= q - 1e-4 * step * slope {
                    accepted = Some((trial, qt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, qt)) = accepted else {
            converged = true;
            break;
        };
        it += 1;
        let decrease = q - qt;
        // the quotient is scale invariant; keep max u = 1
        let m = trial.iter().cloned().fold(0.0, f64::max);
        u = trial.into_iter().map(|x| x / m).collect();
        q = qt;
        history.push(q);
        step *= 2.0;
        if decrease <= 1e-13 * scale {
            converged = true;
            break;
        }
    }
    Ok(YamabeBound { value: q, constant_value, iterations: it, converged, history })
}

/// [`yamabe_descent`] that fails with `IterationLimit` when the descent
/// has not settled within `iterations` steps.
pub fn yamabe_upper_bound(b: &CurvatureBundle, iterations: usize) -> Result<f64> {
    let r = yamabe_descent(b, iterations)?;
    if !r.converged {
        return Err(Error::IterationLimit(format!(
            "Yamabe descent after {} steps at {} (upper bound still valid)",
            r.iterations, r.value
        )));
    }
    Ok(r.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum HypothesisStatus {
    /// Fails for the true Yamabe invariant, whatever its value below the
    /// computed upper bound.
    Violated,
    /// Holds if the Yamabe invariant equals the computed upper bound.
    SatisfiedWithProviso,
    /// Holds exactly (witnessed by the metric itself).
    Satisfied,
    Undetermined,
    /// `W±` vanishes, so the rigidity statement is empty.
    Vacuous,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PinchingRow {
    pub alpha: f64,
    pub d_alpha_plus: f64,
    pub d_alpha_minus: f64,
    /// `𝒲± - (α²/6) yamabeUpper²`
    pub pinching_plus: f64,
    pub pinching_minus: f64,
    /// `(3α²/(1+2α²))(16π²/3)(2χ ± 3τ)`
    pub corollary_threshold_plus: f64,
    pub corollary_threshold_minus: f64,
    pub weyl_pinching_plus: HypothesisStatus,
    pub weyl_pinching_minus: HypothesisStatus,
    pub d_alpha_nonpositive_plus: HypothesisStatus,
    pub d_alpha_nonpositive_minus: HypothesisStatus,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Informational checks do not affect the exit status.
    pub asserted: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RigidityReport {
    pub schema_version: u32,
    pub metric_family: String,
    pub grid_spec: GridSpec,
    pub volume: f64,
    pub alpha_grid: Vec<f64>,
    pub d_alpha_plus: Vec<f64>,
    pub d_alpha_minus: Vec<f64>,
    pub w_plus_l2: f64,
    pub w_minus_l2: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub yamabe_upper: f64,
    pub yamabe_constant: f64,
    pub yamabe_iterations: usize,
    pub yamabe_converged: bool,
    pub scalar_sq: f64,
    pub tracefree_ricci_sq: f64,
    /// `∫R² - 12∫|Ric̊|²`
    pub gursky_rhs: f64,
    pub ninety_six_sigma2: f64,
    pub chi: i32,
    pub tau: i32,
    pub positive_yamabe: HypothesisStatus,
    pub vacuous_plus: bool,
    pub vacuous_minus: bool,
    pub rows: Vec<PinchingRow>,
    pub checks: Vec<ReportCheck>,
}

impl RigidityReport {
    /// All asserted checks pass.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.asserted)
    }

    pub fn check(&self, name: &str) -> Option<&ReportCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per α.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "alpha,dAlphaPlus,dAlphaMinus,pinchingPlus,pinchingMinus,corollaryThresholdPlus,corollaryThresholdMinus,\
             weylPinchingPlus,weylPinchingMinus,dAlphaNonpositivePlus,dAlphaNonpositiveMinus\n",
        );
        let name = |h: HypothesisStatus| serde_json::to_value(h).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        for r in &self.rows {
            s += &format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{}\n",
                r.alpha,
                r.d_alpha_plus,
                r.d_alpha_minus,
                r.pinching_plus,
                r.pinching_minus,
                r.corollary_threshold_plus,
                r.corollary_threshold_minus,
                name(r.weyl_pinching_plus),
                name(r.weyl_pinching_minus),
                name(r.d_alpha_nonpositive_plus),
                name(r.d_alpha_nonpositive_minus),
            );
        }
        s
    }
}

/// Default Yamabe descent budget of [`pinching_report`].
pub const YAMABE_ITERATIONS: usize = 200;

/// `𝒲±` counts as zero below this fraction of the curvature scale
/// `∫R² + ∫|Ric̊|² + 𝒲⁺ + 𝒲⁻`.
pub const VACUOUS_RELATIVE: f64 = 1e-12;

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff.abs() / scale
    } else {
        diff.abs()
    }
}

/// Functionals and hypothesis flags over `alpha_grid`.
pub fn pinching_report(b: &CurvatureBundle, alpha_grid: &[f64]) -> Result<RigidityReport> {
    pinching_report_with(b, alpha_grid, YAMABE_ITERATIONS)
}

pub fn pinching_report_with(b: &CurvatureBundle, alpha_grid: &[f64], yamabe_iterations: usize) -> Result<RigidityReport> {
    for &a in alpha_grid {
        check_alpha(a)?;
    }
    b.require_complete()?;
    let plus = ChiralIntegrals::new(b, Chirality::Plus);
    let minus = ChiralIntegrals::new(b, Chirality::Minus);
    let yam = yamabe_descent(b, yamabe_iterations)?;
    let u = yam.value;

    let per = exec::map(b.len(), |p| {
        let pc = b.point(p);
        let ric0 = (pc.inverse * pc.tracefree_ricci * pc.inverse * pc.tracefree_ricci).trace();
        (pc.scalar * pc.scalar, ric0, sigma2(&pc.schouten, &pc.metric))
    });
    let mut s2 = Vec::with_capacity(per.len());
    for t in &per {
        s2.push(t.2.as_ref().map_err(|e| Error::InvalidMetric(format!("σ₂: {e}")))?.to_owned());
    }
    let scalar_sq = b.integrate(|p| per[p].0);
    let tracefree_ricci_sq = b.integrate(|p| per[p].1);
    let ninety_six_sigma2 = 96.0 * b.integrate(|p| s2[p]);
    let gursky_rhs = scalar_sq - 12.0 * tracefree_ricci_sq;
    let (chi, tau) = (0, 0);

    let curv_scale = scalar_sq + tracefree_ricci_sq + plus.weyl_sq + minus.weyl_sq;
    let vacuous_plus = plus.weyl_sq <= VACUOUS_RELATIVE * curv_scale;
    let vacuous_minus = minus.weyl_sq <= VACUOUS_RELATIVE * curv_scale;

    // 𝒴 ≤ u. If u ≤ 0 the positivity hypothesis fails outright.
    let positive_yamabe = if u <= 0.0 { HypothesisStatus::Violated } else { HypothesisStatus::Undetermined };
    let pinching_status = |vacuous: bool, q: f64| {
        if vacuous {
            HypothesisStatus::Vacuous
        } else if u > 0.0 {
            // 0 < 𝒴 ≤ u gives 𝒴² ≤ u²
            if q > 0.0 {
                HypothesisStatus::Violated
            } else {
                HypothesisStatus::SatisfiedWithProviso
            }
        } else if q <= 0.0 {
            // 𝒴 ≤ u ≤ 0 gives 𝒴² ≥ u²
            HypothesisStatus::Satisfied
        } else {
            HypothesisStatus::Undetermined
        }
    };
    let d_status = |vacuous: bool, d: f64| {
        if vacuous {
            HypothesisStatus::Vacuous
        } else if d <= 0.0 {
            HypothesisStatus::Satisfied
        } else {
            // another metric in the class might still have 𝔇α ≤ 0
            HypothesisStatus::Undetermined
        }
    };

    let mut rows = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let dp = plus.d_alpha(alpha)?;
        let dm = minus.d_alpha(alpha)?;
        let qp = plus.weyl_sq - alpha * alpha / 6.0 * u * u;
        let qm = minus.weyl_sq - alpha * alpha / 6.0 * u * u;
        let pref = 3.0 * alpha * alpha / (1.0 + 2.0 * alpha * alpha) * 16.0 * PI * PI / 3.0;
        rows.push(PinchingRow {
            alpha,
            d_alpha_plus: dp,
            d_alpha_minus: dm,
            pinching_plus: qp,
            pinching_minus: qm,
            corollary_threshold_plus: pref * f64::from(2 * chi + 3 * tau),
            corollary_threshold_minus: pref * f64::from(2 * chi - 3 * tau),
            weyl_pinching_plus: pinching_status(vacuous_plus, qp),
            weyl_pinching_minus: pinching_status(vacuous_minus, qm),
            d_alpha_nonpositive_plus: d_status(vacuous_plus, dp),
            d_alpha_nonpositive_minus: d_status(vacuous_minus, dm),
        });
    }

    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, tolerance: f64, asserted: bool| {
        checks.push(ReportCheck { name: name.into(), value, tolerance, passed: value <= tolerance, asserted });
    };
    for (s, ci) in [("+", &plus), ("-", &minus)] {
        push(&format!("weylL2Nonnegative{s}"), -ci.weyl_sq, 0.0, true);
        let top = ci.d_alpha(ALPHA_MAX)?;
        push(&format!("dAlphaEndpoint{s}"), relative(top - ci.d_plain(), ci.d_plain().abs()), 1e-12, true);
        let (f0, fm, f1) = (ci.d_alpha(0.0)?, ci.d_alpha(ALPHA_MAX / 2.0)?, top);
        let scale = f0.abs().max(fm.abs()).max(f1.abs());
        push(&format!("dAlphaCollinearity{s}"), relative(fm - 0.5 * (f0 + f1), scale), 1e-10, true);
        push(&format!("dAlphaSlope{s}"), relative((f1 - f0) / ALPHA_MAX - ci.slope(), scale / ALPHA_MAX), 1e-10, true);
        // 8∫σ₂ = ∫|W±|² as a literal relation, and the form that follows
        // from Gauss-Bonnet and the signature formula.
        let eight = ninety_six_sigma2 / 12.0;
        // Both sides vanish on conformally flat tori; measure against the
        // curvature that enters σ₂.
        let sc = eight.abs().max(ci.weyl_sq).max((scalar_sq + 12.0 * tracefree_ricci_sq) / 12.0);
        push(&format!("sigma2Relation{s}"), relative(eight - ci.weyl_sq, sc), 1e-6, false);
        push(&format!("sigma2RelationCorrected{s}"), relative(eight + ci.weyl_sq, sc), 1e-6, true);
    }
    push(
        "gurskyForms",
        relative(ninety_six_sigma2 - gursky_rhs, ninety_six_sigma2.abs().max(scalar_sq).max(12.0 * tracefree_ricci_sq)),
        1e-8,
        true,
    );
    push("yamabeBelowConstant", u - yam.constant_value, 0.0, true);

    Ok(RigidityReport {
        schema_version: SCHEMA_VERSION,
        metric_family: b.family_id().to_string(),
        grid_spec: *b.spec(),
        volume: plus.volume,
        alpha_grid: alpha_grid.to_vec(),
        d_alpha_plus: rows.iter().map(|r| r.d_alpha_plus).collect(),
        d_alpha_minus: rows.iter().map(|r| r.d_alpha_minus).collect(),
        w_plus_l2: plus.weyl_sq,
        w_minus_l2: minus.weyl_sq,
        d_plus: plus.d_plain(),
        d_minus: minus.d_plain(),
        yamabe_upper: u,
        yamabe_constant: yam.constant_value,
        yamabe_iterations: yam.iterations,
        yamabe_converged: yam.converged,
        scalar_sq,
        tracefree_ricci_sq,
        gursky_rhs,
        ninety_six_sigma2,
        chi,
        tau,
        positive_yamabe,
        vacuous_plus,
        vacuous_minus,
        rows,
        checks,
    })
}

/// `start:step:end` with the end point included. Values that overshoot
/// 5/9 by less than `1e-3` (a rounded 5/9) are snapped to 5/9.
pub fn parse_alpha_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::OutOfRange(format!("alpha grid '{s}' is not start:step:end or a comma list"));
    let snap = |a: f64| if a > ALPHA_MAX && a < ALPHA_MAX + 1e-3 { ALPHA_MAX } else { a };
    let out: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let [start, step, end] = parts[..] else { return Err(bad()) };
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let mut v = Vec::new();
        let mut k = 0usize;
        loop {
            let a = start + k as f64 * step;
            if a > end + 1e-12 * step {
                break;
            }
            v.push(a);
            k += 1;
        }
        if v.last().is_none_or(|&l| end - l > 1e-9) {
            v.push(end);
        }
        v.into_iter().map(snap).collect()
    } else {
        s.split(',').map(|p| p.trim().parse::<f64>().map(snap)).collect::<std::result::Result<_, _>>().map_err(|_| bad())?
    };
    for &a in &out {
        check_alpha(a)?;
    }
    Ok(out)
}
