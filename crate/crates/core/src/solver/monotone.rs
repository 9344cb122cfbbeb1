use super::cg::solve_spd;
use super::eigen::SpectralResult;
use super::operator::EllipticOperator;
use crate::field::Field;
use crate::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct MonotoneOptions {
    pub max_iter: usize,
    /// Stop when `sup|u_{m+1} - u_m| ≤ tol · sup u`.
    pub tol: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Allowed decrease (increase from above) per step, relative to `sup u`.
    pub monotonicity_slack: f64,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        Self { max_iter: 2000, tol: 1e-13, cg_tol: 1e-12, cg_max_iter: 20_000, monotonicity_slack: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct MonotoneResult {
    /// Limit of the non-decreasing sequence started at the subsolution.
    pub from_below: Field,
    /// Limit of the non-increasing sequence started at the supersolution.
    pub from_above: Field,
    pub beta: f64,
    pub sub_alpha: f64,
    pub super_alpha: f64,
    pub shift: f64,
    pub iterations: [usize; 2],
    /// Largest step against the expected direction, relative to `sup u`.
    pub max_monotonicity_violation: f64,
    /// `(l/l̄)(β/λ₁)^{1/6}` and `(l̄/l)(β/λ₁)^{1/6}`.
    pub sandwich: (f64, f64),
    /// Relative sup residual of `Lu = βu⁻⁵` at `from_below`.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonotoneSummary {
    pub beta: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    pub iterations_from_below: usize,
    pub iterations_from_above: usize,
    pub max_monotonicity_violation: f64,
    pub residual: f64,
}

impl MonotoneResult {
    pub fn summary(&self) -> MonotoneSummary {
        MonotoneSummary {
            beta: self.beta,
            u_min: self.from_below.min(),
            u_max: self.from_below.max(),
            sandwich_lower: self.sandwich.0,
            sandwich_upper: self.sandwich.1,
            iterations_from_below: self.iterations[0],
            iterations_from_above: self.iterations[1],
            max_monotonicity_violation: self.max_monotonicity_violation,
            residual: self.residual,
        }
    }
}

/// Relative sup residual of `Lu = βu⁻⁵`.
pub fn power_equation_residual(op: &EllipticOperator, u: &[f64], beta: f64) -> f64 {
    let lu = op.apply(u);
    let rhs: Vec<f64> = u.iter().map(|x| beta * x.powi(-5)).collect();
    let sup = |w: &mut dyn Iterator<Item = f64>| w.fold(0.0f64, |m, x| m.max(x.abs()));
    let r = sup(&mut lu.iter().zip(&rhs).map(|(a, b)| a - b));
    let s = sup(&mut lu.iter().copied()).max(sup(&mut rhs.iter().copied()));
    if s > 0.0 {
        r / s
    } else {
        r
    }
}

/// Solve `Lu = βu⁻⁵` by `u_{m+1} = (L + M_m)⁻¹(βu_m⁻⁵ + M_m u_m)` from the
/// sub- and supersolutions `αφ₁`, `ᾱφ₁` with `α = β^{1/6}/(l̄ λ₁^{1/6})`,
/// `ᾱ = β^{1/6}/(l λ₁^{1/6})`.
///
/// Both sequences advance together. `M_m = ‖c‖∞ + 5β(min u_m⁻)^{-6}` bounds
/// the Lipschitz constant of `βu⁻⁵` on the current bracket, which is all the
/// comparison argument needs; the fixed bound over `[αl, ᾱl̄]` gives a
/// contraction factor too close to one to be usable when `l̄/l` is large.
/// `shift` in the result is the first, largest `M`.
pub fn monotone_iteration(op: &EllipticOperator, spec: &SpectralResult, beta: f64) -> Result<MonotoneResult> {
    monotone_iteration_with(op, spec, beta, &MonotoneOptions::default())
}

pub fn monotone_iteration_with(op: &EllipticOperator, spec: &SpectralResult, beta: f64, opts: &MonotoneOptions) -> Result<MonotoneResult> {
    let lambda1 = spec.lambda1;
    if !(lambda1 > 0.0) {
        return Err(Error::DegenerateOperator(format!("λ₁ = {lambda1:e} ≤ 0")));
    }
    if !(beta > 0.0) {
        return Err(Error::OutOfRange(format!("β = {beta} ≤ 0")));
    }
    let (l, lbar) = (spec.l_min(), spec.l_max());
    let root = (beta / lambda1).powf(1.0 / 6.0);
    let sub_alpha = root / lbar;
    let super_alpha = root / l;
    let n = op.len();
    let weight = op.volume();
    let c_sup = op.c_sup();
    let mut below: Vec<f64> = spec.phi1.data().iter().map(|x| sub_alpha * x).collect();
    let mut above: Vec<f64> = spec.phi1.data().iter().map(|x| super_alpha * x).collect();
    let mut first_shift = None;
    let mut max_violation: f64 = 0.0;
    let mut done = [false; 2];
    let mut iterations = [0usize; 2];
    for it in 0..opts.max_iter {
        let umin = below.iter().cloned().fold(f64::INFINITY, f64::min);
        let shift = c_sup + 5.0 * beta * umin.powi(-6);
        first_shift.get_or_insert(shift);
        let shift_vec = vec![shift; n];
        let diag = op.diagonal(&shift_vec);
        for (k, u) in [&mut below, &mut above].into_iter().enumerate() {
            if done[k] {
                continue;
            }
            let upward = k == 0;
            let rhs: Vec<f64> = u.iter().map(|x| beta * x.powi(-5) + shift * x).collect();
            let mut next = u.clone();
            solve_spd(|w| op.apply_shifted(w, &shift_vec), &rhs, &diag, weight, &mut next, opts.cg_tol, opts.cg_max_iter)?;
            let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mut step: f64 = 0.0;
            let mut against: f64 = 0.0;
            for (a, b) in next.iter().zip(u.iter()) {
                let d = a - b;
                step = step.max(d.abs());
                against = against.max(if upward { -d } else { d });
            }
            let violation = against / sup;
            max_violation = max_violation.max(violation);
            if violation > opts.monotonicity_slack {
                return Err(Error::ContractError(format!(
                    "monotone iteration from {} moved the wrong way by {violation:e} at step {it}",
                    if upward { "below" } else { "above" }
                )));
            }
            *u = next;
            iterations[k] = it + 1;
            done[k] = step <= opts.tol * sup;
        }
        if done[0] && done[1] {
            let residual = power_equation_residual(op, &below, beta);
            return Ok(MonotoneResult {
                from_below: op.field(&below),
                from_above: op.field(&above),
                beta,
                sub_alpha,
                super_alpha,
                shift: first_shift.unwrap_or(shift),
                iterations,
                max_monotonicity_violation: max_violation,
                sandwich: (l / lbar * root, lbar / l * root),
                residual,
            });
        }
    }
    Err(Error::IterationLimit(format!("monotone iteration did not settle in {} steps", opts.max_iter)))
}
