use super::cg::solve_spd;
use super::operator::EllipticOperator;
use crate::field::Field;
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { krylov_dim: 8, max_restarts: 60, tol: 1e-10, cg_tol: 1e-11, cg_max_iter: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Positive, `∫φ₁² dV = 1`.
    pub phi1: Field,
    /// `‖Lφ₁ - λ₁φ₁‖ / (scale · ‖φ₁‖)` with `scale = max(|λ₁|, ‖c‖∞, max a)`.
    pub residual_norm: f64,
    pub shift: f64,
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralSummary {
    pub lambda1: f64,
    pub residual_norm: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl SpectralResult {
    /// `l = min φ₁`.
    pub fn l_min(&self) -> f64 {
        self.phi1.min()
    }

    /// `l̄ = max φ₁`.
    pub fn l_max(&self) -> f64 {
        self.phi1.max()
    }

    pub fn summary(&self) -> SpectralSummary {
        SpectralSummary { lambda1: self.lambda1, residual_norm: self.residual_norm, phi_min: self.l_min(), phi_max: self.l_max() }
    }
}

/// Coefficients below this are round-off (flat pieces of the metric).
/// A shift tied to them would let `(L - σ)⁻¹` amplify the noise.
const SHIFT_FLOOR: f64 = 1e-8;

/// Shift used by the inverse iteration: `σ = min c - δ`, so `L - σ ≥ δ`.
pub fn inverse_iteration_shift(op: &EllipticOperator) -> f64 {
    let scale = op.c_sup().max(op.a_max());
    op.c_min() - (0.1 * scale).max(SHIFT_FLOOR)
}

fn orthonormalize(op: &EllipticOperator, basis: &[Vec<f64>], mut y: Vec<f64>) -> Option<Vec<f64>> {
    let before = op.norm(&y);
    for _ in 0..2 {
        for q in basis {
            let h = op.inner(q, &y);
            y.iter_mut().zip(q).for_each(|(v, qv)| *v -= h * qv);
        }
    }
    let after = op.norm(&y);
    if !(after > 1e-10 * before) || after == 0.0 {
        return None;
    }
    y.iter_mut().for_each(|v| *v /= after);
    Some(y)
}

/// Smallest eigenpair of `L` by Rayleigh–Ritz on Krylov spaces of
/// `(L - σ)⁻¹`, restarted from the current Ritz vector. `σ` starts at
/// [`inverse_iteration_shift`] and moves up toward the Ritz value.
pub fn first_eigenpair(op: &EllipticOperator) -> Result<SpectralResult> {
    first_eigenpair_with(op, &EigenOptions::default())
}

pub fn first_eigenpair_with(op: &EllipticOperator, opts: &EigenOptions) -> Result<SpectralResult> {
    let n = op.len();
    let sigma0 = inverse_iteration_shift(op);
    let mut sigma = sigma0;
    let weight = op.volume();
    let scale = op.c_sup().max(op.a_max()).max(1e-300);
    let mut x = vec![1.0; n];
    let mut last = (f64::NAN, f64::INFINITY);
    for restart in 0..opts.max_restarts {
        // Rayleigh–Ritz uses the exact L, so early bases tolerate loose solves.
        let cg_tol = (1e-2 * last.1).clamp(opts.cg_tol, 1e-6);
        let shift = vec![-sigma; n];
        let diag = op.diagonal(&shift);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(opts.krylov_dim);
        basis.push(orthonormalize(op, &[], x.clone()).ok_or_else(|| Error::DegenerateSpectrum("zero start vector".into()))?);
        let mut indefinite = false;
        while basis.len() < opts.krylov_dim {
            let rhs = basis.last().expect("non-empty").clone();
            let mut y = vec![0.0; n];
            match solve_spd(|v| op.apply_shifted(v, &shift), &rhs, &diag, weight, &mut y, cg_tol, opts.cg_max_iter) {
                Ok(_) => {}
                Err(Error::DegenerateOperator(_)) if sigma > sigma0 => {
                    indefinite = true;
                    break;
                }
                Err(e) => return Err(e),
            }
            match orthonormalize(op, &basis, y) {
                Some(q) => basis.push(q),
                None => break,
            }
        }
        if indefinite {
            // The moved shift overshot λ₁; fall back to the safe one.
            log::debug!("eigen restart {restart}: shift {sigma:e} not below λ₁, resetting");
            sigma = sigma0;
            continue;
        }
        let lq: Vec<Vec<f64>> = basis.iter().map(|q| op.apply(q)).collect();
        let m = basis.len();
        let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (op.inner(&basis[i], &lq[j]) + op.inner(&basis[j], &lq[i])));
        let eig = SymmetricEigen::new(h);
        let (imin, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let s = eig.eigenvectors.column(imin);
        let mut phi = vec![0.0; n];
        let mut lphi = vec![0.0; n];
        for k in 0..m {
            for p in 0..n {
                phi[p] += s[k] * basis[k][p];
                lphi[p] += s[k] * lq[k][p];
            }
        }
        let total: f64 = op.integrate(&phi);
        if total < 0.0 {
            phi.iter_mut().for_each(|v| *v = -*v);
            lphi.iter_mut().for_each(|v| *v = -*v);
        }
        let norm = op.norm(&phi);
        phi.iter_mut().for_each(|v| *v /= norm);
        lphi.iter_mut().for_each(|v| *v /= norm);
        let r: Vec<f64> = (0..n).map(|p| lphi[p] - theta * phi[p]).collect();
        let res = op.norm(&r) / scale.max(theta.abs());
        log::debug!("eigen restart {restart}: θ = {theta:.15e}, residual {res:.3e}, basis {m}");
        last = (theta, res);
        // Move the shift toward θ as the residual shrinks: an eigenvalue lies
        // within ‖r‖ of θ, so θ - 4‖r‖ stays below λ₁ once φ is close to φ₁.
        // Keeping a fraction of the initial gap bounds the CG condition number.
        let reach = theta - 4.0 * op.norm(&r);
        sigma = sigma.max(reach.min(theta - 0.02 * (theta - sigma0)));
        x = phi;
        if res <= opts.tol || m < 2 {
            let lambda1 = op.rayleigh(&x);
            let phi1 = op.field(&x);
            if phi1.min() <= 0.0 {
                return Err(Error::ContractError(format!("first eigenfunction not positive: min φ₁ = {:e}", phi1.min())));
            }
            return Ok(SpectralResult { lambda1, phi1, residual_norm: res, shift: sigma0, restarts: restart });
        }
    }
    Err(Error::IterationLimit(format!("eigenpair residual {:e} at θ = {} after {} restarts", last.1, last.0, opts.max_restarts)))
}
