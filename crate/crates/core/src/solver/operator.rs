use crate::algebra::Mat4;
use crate::curvature::CurvatureBundle;
use crate::field::{Field, GridSpec, MetricField, Spectral};
use crate::{exec, Error, Result};
use std::f64::consts::PI;

/// Absolute floor on `min a` below which the geometric operator counts as
/// degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Require `min a > DEGENERACY_THRESHOLD`.
    Nondegenerate,
    /// Accept any `a ≥ 0`.
    Degenerate,
}

/// `L v = -div(a ∇v) + c v` on a periodic grid, with the volume element and
/// inverse metric of the background metric.
pub struct EllipticOperator {
    spec: GridSpec,
    spectral: Spectral,
    a: Vec<f64>,
    b: Vec<[f64; 4]>,
    c0: Vec<f64>,
    c: Vec<f64>,
    volume: Vec<f64>,
    inverse: Vec<Mat4>,
    metric: Option<MetricField>,
    family_id: String,
}

impl EllipticOperator {
    /// Geometric coefficients `a = ¼|W|²`, `B_s = W_sijk δW_ijk`,
    /// `c₀ = |δW|²`, `c = c₀ + div B`.
    pub fn geometric(bundle: &CurvatureBundle, mode: Mode) -> Result<Self> {
        bundle.require_complete()?;
        let spec = *bundle.spec();
        let spectral = Spectral::new(&spec);
        let n = bundle.len();
        let a = exec::map(n, |p| 0.25 * bundle.norm_weyl_sq(p));
        let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
        if mode == Mode::Nondegenerate && !(amin > DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateWeyl(format!("min ¼|W|² = {amin:e}")));
        }
        let b = exec::map(n, |p| bundle.derivatives(p).one_form_b);
        let c0 = exec::map(n, |p| crate::identities::three_norm_sq(&bundle.derivatives(p).div_weyl));
        let div_b = crate::identities::divergence_one_form(bundle, &spectral, &b);
        let c = exec::map(n, |p| c0[p] + div_b[p]);
        Ok(Self {
            spec,
            spectral,
            a,
            b,
            c0,
            c,
            volume: exec::map(n, |p| bundle.point(p).volume),
            inverse: exec::map(n, |p| bundle.point(p).inverse),
            metric: Some(bundle.metric().clone()),
            family_id: bundle.family_id().to_string(),
        })
    }

    /// Flat background, `B = 0`, `c₀ = c`.
    pub fn synthetic(a: &Field, c: &Field) -> Result<Self> {
        if a.rank() != 0 || c.rank() != 0 || a.spec() != c.spec() {
            return Err(Error::ShapeError("a and c must be scalar fields on one grid".into()));
        }
        if a.min() < 0.0 {
            return Err(Error::OutOfRange(format!("min a = {} < 0", a.min())));
        }
        let spec = *a.spec();
        let n = spec.points();
        Ok(Self {
            spec,
            spectral: Spectral::new(&spec),
            a: a.data().to_vec(),
            b: vec![[0.0; 4]; n],
            c0: c.data().to_vec(),
            c: c.data().to_vec(),
            volume: vec![1.0; n],
            inverse: vec![Mat4::identity(); n],
            metric: None,
            family_id: "synthetic".into(),
        })
    }

    /// Constant coefficients on a flat grid.
    pub fn constant(spec: GridSpec, a: f64, c: f64) -> Result<Self> {
        Self::synthetic(&Field::constant(spec, a), &Field::constant(spec, c))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn metric(&self) -> Option<&MetricField> {
        self.metric.as_ref()
    }

    pub fn family_id(&self) -> &str {
        &self.family_id
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[[f64; 4]] {
        &self.b
    }

    pub fn c0(&self) -> &[f64] {
        &self.c0
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn volume(&self) -> &[f64] {
        &self.volume
    }

    pub fn field(&self, data: &[f64]) -> Field {
        Field::scalar(self.spec, data.to_vec()).expect("grid-sized data")
    }

    pub fn a_field(&self) -> Field {
        self.field(&self.a)
    }

    pub fn c_field(&self) -> Field {
        self.field(&self.c)
    }

    pub fn c0_field(&self) -> Field {
        self.field(&self.c0)
    }

    pub fn volume_field(&self) -> Field {
        self.field(&self.volume)
    }

    pub fn b_field(&self) -> Field {
        Field::new(self.spec, 4, self.b.iter().flatten().copied().collect()).expect("grid-sized data")
    }

    pub fn c_sup(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn c_min(&self) -> f64 {
        self.c.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn a_max(&self) -> f64 {
        self.a.iter().cloned().fold(0.0, f64::max)
    }

    pub fn a_min(&self) -> f64 {
        self.a.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `∫ f dV`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        exec::sum(f.len(), |p| f[p] * self.volume[p]) * self.spec.cell_volume()
    }

    /// `⟨u, w⟩ = ∫ u w dV`.
    pub fn inner(&self, u: &[f64], w: &[f64]) -> f64 {
        exec::sum(u.len(), |p| u[p] * w[p] * self.volume[p]) * self.spec.cell_volume()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    pub fn total_volume(&self) -> f64 {
        self.integrate(&vec![1.0; self.len()])
    }

    fn flux(&self, v: &[f64]) -> [Vec<f64>; 4] {
        let g = self.spectral.gradient(v);
        std::array::from_fn(|i| {
            exec::map(self.len(), |p| {
                let gi = &self.inverse[p];
                self.volume[p] * self.a[p] * (0..4).map(|j| gi[(i, j)] * g[j][p]).sum::<f64>()
            })
        })
    }

    /// `L v` on raw grid data.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let f = self.flux(v);
        let div = self.spectral.divergence([&f[0], &f[1], &f[2], &f[3]]);
        exec::map(self.len(), |p| -div[p] / self.volume[p] + self.c[p] * v[p])
    }

    /// `(L + diag(s)) v`.
    pub fn apply_shifted(&self, v: &[f64], shift: &[f64]) -> Vec<f64> {
        let mut out = self.apply(v);
        for (o, (x, s)) in out.iter_mut().zip(v.iter().zip(shift)) {
            *o += s * x;
        }
        out
    }

    /// `∫ a |∇v|² dV`.
    pub fn dirichlet(&self, v: &[f64]) -> f64 {
        let g = self.spectral.gradient(v);
        let dens = exec::map(self.len(), |p| {
            let gi = &self.inverse[p];
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += gi[(i, j)] * g[i][p] * g[j][p];
                }
            }
            self.a[p] * s
        });
        self.integrate(&dens)
    }

    /// `∫ a|∇v|² + c v² dV = ⟨Lv, v⟩`.
    pub fn energy(&self, v: &[f64]) -> f64 {
        let cv: Vec<f64> = v.iter().zip(&self.c).map(|(x, c)| c * x * x).collect();
        self.dirichlet(v) + self.integrate(&cv)
    }

    /// Rayleigh quotient `𝔕(u) = ⟨Lu, u⟩ / ∫u²`.
    pub fn rayleigh(&self, u: &[f64]) -> f64 {
        self.energy(u) / self.inner(u, u)
    }

    /// Jacobi diagonal of `L + shift`, using the exact diagonal of the
    /// spectral second-derivative matrix along each axis.
    pub fn diagonal(&self, shift: &[f64]) -> Vec<f64> {
        let n = self.spec.n();
        let k2: [f64; 4] = std::array::from_fn(|a| {
            let l = self.spec.periods()[a];
            (1..n / 2).map(|m| 2.0 * (2.0 * PI * m as f64 / l).powi(2)).sum::<f64>() / n as f64
        });
        exec::map(self.len(), |p| {
            let gi = &self.inverse[p];
            self.a[p] * (0..4).map(|i| gi[(i, i)] * k2[i]).sum::<f64>() + self.c[p] + shift[p]
        })
    }
}

/// `Lv` for a scalar field.
pub fn apply_l(op: &EllipticOperator, v: &Field) -> Result<Field> {
    if v.rank() != 0 || v.spec() != op.spec() {
        return Err(Error::ShapeError("v must be a scalar field on the operator grid".into()));
    }
    Ok(op.field(&op.apply(v.data())))
}

/// Conformal-factor functional
/// `𝔇(v) = (∫v⁻⁴)^{1/2} ∫(a|∇v|² + c₀v² - ⟨B, ∇(v²)⟩) dV`.
pub fn functional_d(op: &EllipticOperator, v: &Field) -> Result<f64> {
    if v.rank() != 0 || v.spec() != op.spec() {
        return Err(Error::ShapeError("v must be a scalar field on the operator grid".into()));
    }
    functional_d_slice(op, v.data())
}

pub(crate) fn functional_d_slice(op: &EllipticOperator, v: &[f64]) -> Result<f64> {
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(vmin > 0.0) {
        return Err(Error::InvalidConformalFactor(format!("min v = {vmin}")));
    }
    let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
    let dv2 = op.spectral.gradient(&v2);
    let lower = exec::map(op.len(), |p| {
        let gi = &op.inverse[p];
        let mut bdot = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                bdot += gi[(i, j)] * op.b[p][i] * dv2[j][p];
            }
        }
        op.c0[p] * v2[p] - bdot
    });
    let inv4: Vec<f64> = v.iter().map(|x| x.powi(-4)).collect();
    Ok(op.integrate(&inv4).sqrt() * (op.dirichlet(v) + op.integrate(&lower)))
}
