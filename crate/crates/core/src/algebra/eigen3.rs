use super::pairs::Mat3;
use nalgebra::Vector3;
use std::f64::consts::PI;

/// Eigenvalues of a symmetric 3×3 matrix, ascending.
///
/// The simple eigenvalue comes from the trigonometric solution of the
/// characteristic cubic; the other two from the 2×2 block on its orthogonal
/// complement, which keeps them accurate near a double root.
pub fn symmetric_eigenvalues3(a: &Mat3) -> [f64; 3] {
    let a = (a + a.transpose()) * 0.5;
    let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    if off == 0.0 {
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = a.trace() / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let b = (a - Mat3::identity() * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // r ≥ 0: the largest root is the isolated one, otherwise the smallest.
    let simple = if r >= 0.0 {
        q + 2.0 * p * phi.cos()
    } else {
        q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos()
    };

    let shifted = a - Mat3::identity() * simple;
    let rows = [shifted.row(0).transpose(), shifted.row(1).transpose(), shifted.row(2).transpose()];
    let crosses = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])];
    let v = crosses
        .iter()
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))
        .copied()
        .unwrap_or_else(Vector3::x);
    let nv = v.norm();
    let v = if nv > 0.0 { v / nv } else { Vector3::x() };
    let seed = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = v.cross(&seed).normalize();
    let w = v.cross(&u);
    let b00 = u.dot(&(a * u));
    let b11 = w.dot(&(a * w));
    let b01 = u.dot(&(a * w));
    let mid = 0.5 * (b00 + b11);
    let rad = (0.5 * (b00 - b11)).hypot(b01);
    let mut out = [simple, mid - rad, mid + rad];
    out.sort_by(f64::total_cmp);
    out
}
