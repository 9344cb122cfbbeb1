use super::cg::solve_spd;
use super::eigen::{first_eigenpair, SpectralResult};
use super::operator::{functional_d_slice, EllipticOperator};
use crate::field::Field;
use crate::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Relative sup-norm tolerance on `Lv - λ(v) v⁻⁵`.
    pub el_tol: f64,
    /// Relative decrease of `𝔇` below which the descent counts as stalled.
    pub decrease_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Positivity floor as a fraction of `max v`.
    pub floor: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            el_tol: 1e-6,
            decrease_tol: 1e-12,
            cg_tol: 1e-10,
            cg_max_iter: 20_000,
            floor: 1e-8,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    /// Positive, `∫v⁻⁴ dV = 1`.
    pub v: Field,
    pub d_value: f64,
    /// Smallest `𝔇` seen along the descent.
    pub d_hat: f64,
    /// `λ(v) = 𝔇(v) (∫v⁻⁴)^{-3/2}`.
    pub lambda_v: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The `𝒟 = 0` branch: `λ₁ = 0` and `v` is the renormalized `φ₁`.
    pub degenerate: bool,
    pub history: Vec<f64>,
    /// Whether the positivity floor was active at the returned iterate.
    pub floor_active: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinimizeSummary {
    pub d_value: f64,
    pub d_hat: f64,
    pub lambda_v: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub v_min: f64,
    pub v_max: f64,
}

impl MinimizeResult {
    pub fn summary(&self) -> MinimizeSummary {
        MinimizeSummary {
            d_value: self.d_value,
            d_hat: self.d_hat,
            lambda_v: self.lambda_v,
            el_residual: self.el_residual,
            iterations: self.iterations,
            converged: self.converged,
            degenerate: self.degenerate,
            v_min: self.v.min(),
            v_max: self.v.max(),
        }
    }
}

/// Relative size of round-off in an evaluation of `𝔇`.
const ROUNDOFF: f64 = 1e-13;

/// `λ₁ < 1e-10 ‖c‖∞ + 1e-14` selects the `𝒟 = 0` branch.
pub fn is_degenerate(op: &EllipticOperator, lambda1: f64) -> bool {
    lambda1 < 1e-10 * op.c_sup() + 1e-14
}

/// Scale `v` so that `∫v⁻⁴ dV = 1`.
pub fn normalize_inverse_quartic(op: &EllipticOperator, v: &[f64]) -> Vec<f64> {
    let inv4: Vec<f64> = v.iter().map(|x| x.powi(-4)).collect();
    let s = op.integrate(&inv4).powf(0.25);
    v.iter().map(|x| x * s).collect()
}

/// `λ(v)` and the relative residual `sup|Lv - λ(v)v⁻⁵| / max(sup|Lv|, sup|λ v⁻⁵|)`.
pub fn euler_lagrange_residual(op: &EllipticOperator, v: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let d = functional_d_slice(op, v)?;
    let inv4: Vec<f64> = v.iter().map(|x| x.powi(-4)).collect();
    let lambda = d * op.integrate(&inv4).powf(-1.5);
    let lv = op.apply(v);
    let rhs: Vec<f64> = v.iter().map(|x| lambda * x.powi(-5)).collect();
    let r: Vec<f64> = lv.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let sup = |w: &[f64]| w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = sup(&lv).max(sup(&rhs));
    let rel = if scale > 0.0 { sup(&r) / scale } else { sup(&r) };
    Ok((lambda, rel, r))
}

/// Minimize `𝔇` over positive fields. Each step solves
/// `(L + 5λ(v) v⁻⁶) d = -(Lv - λ(v) v⁻⁵)`, the linearization of the
/// Euler–Lagrange equation with `λ` frozen, which is a descent direction
/// for `𝔇`; the step is backtracked until the Armijo condition holds and
/// the iterate stays above the positivity floor, then renormalized to
/// `∫v⁻⁴ = 1`.
pub fn minimize_d(op: &EllipticOperator, init: Option<&Field>) -> Result<MinimizeResult> {
    let spec = first_eigenpair(op)?;
    minimize_d_with(op, init, &spec, &MinimizeOptions::default())
}

pub fn minimize_d_with(op: &EllipticOperator, init: Option<&Field>, spec: &SpectralResult, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let n = op.len();
    if is_degenerate(op, spec.lambda1) {
        let v = normalize_inverse_quartic(op, spec.phi1.data());
        let d = functional_d_slice(op, &v)?;
        let (lambda_v, el, _) = euler_lagrange_residual(op, &v)?;
        return Ok(MinimizeResult {
            v: op.field(&v),
            d_value: d,
            d_hat: d,
            lambda_v,
            el_residual: el,
            iterations: 0,
            converged: true,
            degenerate: true,
            history: vec![d],
            floor_active: false,
        });
    }
    let start = match init {
        Some(f) => {
            if f.spec() != op.spec() || f.rank() != 0 {
                return Err(Error::ShapeError("init must be a scalar field on the operator grid".into()));
            }
            f.data().to_vec()
        }
        None => spec.phi1.data().to_vec(),
    };
    if start.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidConformalFactor("initial field must be positive".into()));
    }
    let mut v = normalize_inverse_quartic(op, &start);
    let mut d = functional_d_slice(op, &v)?;
    let mut history = vec![d];
    let mut rel_decrease = f64::INFINITY;
    let weight = op.volume();
    for iter in 0..opts.max_iter {
        let (lambda, el, r) = euler_lagrange_residual(op, &v)?;
        log::debug!("descent {iter}: 𝔇 = {d:.15e}, EL {el:.3e}");
        if el < opts.el_tol && (rel_decrease < opts.decrease_tol || el < 1e-3 * opts.el_tol) {
            return Ok(finish(op, v, d, &history, lambda, el, iter, true, opts));
        }
        let shift: Vec<f64> = v.iter().map(|x| 5.0 * lambda * x.powi(-6)).collect();
        let diag = op.diagonal(&shift);
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let mut dir = vec![0.0; n];
        let cg_tol = opts.cg_tol.max(0.01 * el.min(1.0));
        solve_spd(|w| op.apply_shifted(w, &shift), &rhs, &diag, weight, &mut dir, cg_tol, opts.cg_max_iter)?;
        // grad 𝔇 = 2 (∫v⁻⁴)^{1/2} (Lv - λv⁻⁵) = 2r with the normalization.
        let slope = 2.0 * op.inner(&r, &dir);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = v.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let vmax = trial.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let vmin = trial.iter().cloned().fold(f64::INFINITY, f64::min);
            if vmin > opts.floor * vmax {
                let dt = functional_d_slice(op, &trial)?;
                if dt <= d + opts.armijo * t * slope {
                    accepted = Some((trial, dt));
                    break;
                }
                // Near the minimum the predicted decrease drops below the
                // round-off of 𝔇 and Armijo cannot tell steps apart; fall
                // back to the Euler-Lagrange residual as the merit.
                let noise = ROUNDOFF * d.abs();
                if -slope * t < noise && dt <= d + noise {
                    let normalized = normalize_inverse_quartic(op, &trial);
                    if euler_lagrange_residual(op, &normalized)?.1 < el {
                        accepted = Some((trial, dt.min(d)));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((trial, dt)) = accepted else {
            if el < opts.el_tol {
                return Ok(finish(op, v, d, &history, lambda, el, iter, true, opts));
            }
            return Err(Error::StepRejected(format!("no admissible step at iteration {iter}: 𝔇 = {d:e}, EL residual {el:e}")));
        };
        v = normalize_inverse_quartic(op, &trial);
        rel_decrease = (d - dt) / d.abs().max(1e-300);
        d = dt;
        history.push(d);
    }
    let (lambda, el, _) = euler_lagrange_residual(op, &v)?;
    if el < opts.el_tol {
        return Ok(finish(op, v, d, &history, lambda, el, opts.max_iter, true, opts));
    }
    Err(Error::IterationLimit(format!("descent stopped at EL residual {el:e} after {} iterations", opts.max_iter)))
}

#[allow(clippy::too_many_arguments)]
fn finish(op: &EllipticOperator, v: Vec<f64>, d: f64, history: &[f64], lambda: f64, el: f64, iterations: usize, converged: bool, opts: &MinimizeOptions) -> MinimizeResult {
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    MinimizeResult {
        v: op.field(&v),
        d_value: d,
        d_hat: history.iter().cloned().fold(f64::INFINITY, f64::min),
        lambda_v: lambda,
        el_residual: el,
        iterations,
        converged,
        degenerate: false,
        history: history.to_vec(),
        floor_active: vmin <= opts.floor * vmax * (1.0 + 1e-12),
    }
}
