use crate::{exec, Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for an operator that is
/// symmetric positive definite in the inner product weighted by `weight`.
/// Stops when `‖b - Ax‖_w ≤ tol ‖b‖_w`.
pub fn solve_spd(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    diag: &[f64],
    weight: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = rhs.len();
    let dot = |u: &[f64], v: &[f64]| exec::sum(n, |p| u[p] * v[p] * weight[p]);
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let ax = apply(x);
    let mut r: Vec<f64> = (0..n).map(|p| rhs[p] - ax[p]).collect();
    let mut z: Vec<f64> = (0..n).map(|p| r[p] / diag[p]).collect();
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok(CgOutcome { iterations: it, relative_residual: rel });
        }
        let ad = apply(&d);
        let dad = dot(&d, &ad);
        if !(dad > 0.0) {
            return Err(Error::DegenerateOperator(format!("non-positive curvature ⟨d, Ad⟩ = {dad:e} in CG")));
        }
        let alpha = rz / dad;
        for p in 0..n {
            x[p] += alpha * d[p];
            r[p] -= alpha * ad[p];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        for p in 0..n {
            z[p] = r[p] / diag[p];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for p in 0..n {
            d[p] = z[p] + beta * d[p];
        }
    }
    if rel <= tol {
        return Ok(CgOutcome { iterations: max_iter, relative_residual: rel });
    }
    Err(Error::IterationLimit(format!("CG stalled at relative residual {rel:e} after {max_iter} iterations")))
}
