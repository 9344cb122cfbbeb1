use super::families::MetricFamily;
use crate::algebra::{Mat4, PointFrame};
use crate::{exec, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A uniform `n⁴` lattice on `∏[0, L_a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSpec {
    n: usize,
    periods: [f64; 4],
    anti_alias_factor: f64,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_periods(n, [2.0 * PI; 4])
    }

    pub fn with_periods(n: usize, periods: [f64; 4]) -> Result<Self> {
        Self::with_anti_alias(n, periods, 4.0)
    }

    /// `n` must be even and at least 4.
    pub fn with_anti_alias(n: usize, periods: [f64; 4], anti_alias_factor: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and at least 4")));
        }
        if periods.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGrid(format!("periods {periods:?} must be positive")));
        }
        if !(anti_alias_factor >= 1.0) {
            return Err(Error::InvalidGrid(format!("anti-alias factor {anti_alias_factor} must be at least 1")));
        }
        Ok(Self { n, periods, anti_alias_factor })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn periods(&self) -> [f64; 4] {
        self.periods
    }

    pub fn anti_alias_factor(&self) -> f64 {
        self.anti_alias_factor
    }

    pub fn points(&self) -> usize {
        self.n.pow(4)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..4).map(|a| self.spacing(a)).product()
    }

    pub fn coordinate_volume(&self) -> f64 {
        self.periods.iter().product()
    }

    #[inline]
    pub fn index(&self, i: [usize; 4]) -> usize {
        ((i[0] * self.n + i[1]) * self.n + i[2]) * self.n + i[3]
    }

    #[inline]
    pub fn multi_index(&self, p: usize) -> [usize; 4] {
        let n = self.n;
        [p / (n * n * n), (p / (n * n)) % n, (p / n) % n, p % n]
    }

    #[inline]
    pub fn coords(&self, p: usize) -> [f64; 4] {
        let i = self.multi_index(p);
        std::array::from_fn(|a| i[a] as f64 * self.spacing(a))
    }

    /// Smallest `n` this spec accepts for content of the given degree.
    pub fn required_n(&self, degree: usize) -> f64 {
        self.anti_alias_factor * degree as f64
    }
}

/// Tensor field with `rank` lower indices, point-major: the components at
/// point `p` occupy `data[p·4^rank .. (p+1)·4^rank]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    spec: GridSpec,
    rank: u32,
    data: Vec<f64>,
}

impl Field {
    pub fn new(spec: GridSpec, rank: u32, data: Vec<f64>) -> Result<Self> {
        let want = spec.points() * 4usize.pow(rank);
        if data.len() != want {
            return Err(Error::ShapeError(format!("rank-{rank} field on n = {} needs {want} values, got {}", spec.n, data.len())));
        }
        if let Some(p) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::ShapeError(format!("non-finite entry at {p}")));
        }
        Ok(Self { spec, rank, data })
    }

    pub fn scalar(spec: GridSpec, data: Vec<f64>) -> Result<Self> {
        Self::new(spec, 0, data)
    }

    pub fn zeros(spec: GridSpec, rank: u32) -> Self {
        Self { spec, rank, data: vec![0.0; spec.points() * 4usize.pow(rank)] }
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self { spec, rank: 0, data: vec![c; spec.points()] }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 4]) -> f64 + Sync + Send) -> Self {
        Self { spec, rank: 0, data: exec::map(spec.points(), |p| f(spec.coords(p))) }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn components(&self) -> usize {
        4usize.pow(self.rank)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, p: usize) -> &[f64] {
        let c = self.components();
        &self.data[p * c..(p + 1) * c]
    }

    /// One component as a scalar field array.
    pub fn component(&self, c: usize) -> Vec<f64> {
        let k = self.components();
        (0..self.spec.points()).map(|p| self.data[p * k + c]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.spec == other.spec && self.rank == other.rank
    }
}

/// `Σ_p f_p vol_p · cell volume`, exact for resolved trigonometric
/// polynomials.
pub fn integrate(f: &Field, vol: &Field) -> Result<f64> {
    if f.rank != 0 || vol.rank != 0 || f.spec != vol.spec {
        return Err(Error::ShapeError("integrate needs two scalar fields on the same grid".into()));
    }
    Ok(integrate_slice(&f.spec, &f.data, &vol.data))
}

pub fn integrate_slice(spec: &GridSpec, f: &[f64], vol: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), vol.len());
    exec::sum(f.len(), |p| f[p] * vol[p]) * spec.cell_volume()
}

/// Symmetric positive definite rank-2 field with its provenance.
#[derive(Clone, Debug)]
pub struct MetricField {
    field: Field,
    family: MetricFamily,
}

impl MetricField {
    pub fn new(field: Field, family: MetricFamily) -> Result<Self> {
        if field.rank != 2 {
            return Err(Error::ShapeError("metric field must have rank 2".into()));
        }
        let n = field.spec.points();
        let bad = exec::map(n, |p| {
            let g = field.at(p);
            let scale = g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for i in 0..4 {
                for j in i + 1..4 {
                    if (g[i * 4 + j] - g[j * 4 + i]).abs() > 1e-14 * scale {
                        return Some(format!("asymmetric metric at point {p}"));
                    }
                }
            }
            PointFrame::new(Mat4::from_row_slice(g)).err().map(|e| format!("point {p}: {e}"))
        });
        if let Some(msg) = bad.into_iter().flatten().next() {
            return Err(Error::InvalidMetric(msg));
        }
        Ok(Self { field, family })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.field.spec
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn family(&self) -> &MetricFamily {
        &self.family
    }

    #[inline]
    pub fn at(&self, p: usize) -> Mat4 {
        Mat4::from_row_slice(self.field.at(p))
    }

    /// Scalar field `√det g`.
    pub fn volume_field(&self) -> Field {
        let data = exec::map(self.spec().points(), |p| self.at(p).determinant().sqrt());
        Field { spec: self.field.spec, rank: 0, data }
    }

    pub fn volume(&self) -> f64 {
        let v = self.volume_field();
        v.data.iter().sum::<f64>() * self.spec().cell_volume()
    }

    /// Smallest eigenvalue of `g_ij` (as a matrix) over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        exec::min(self.spec().points(), |p| {
            nalgebra::SymmetricEigen::new(self.at(p)).eigenvalues.min()
        })
    }

    pub fn symmetry_residual(&self) -> f64 {
        exec::max(self.spec().points(), |p| {
            let g = self.at(p);
            (g - g.transpose()).amax()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::new(2).is_err());
        assert!(GridSpec::with_periods(8, [1.0, 1.0, 0.0, 1.0]).is_err());
        assert!(GridSpec::with_anti_alias(8, [1.0; 4], 0.5).is_err());
        let g = GridSpec::new(8).unwrap();
        for p in [0, 17, 4095] {
            assert_eq!(g.index(g.multi_index(p)), p);
        }
    }

    #[test]
    fn quadrature_examples() {
        let spec = GridSpec::new(8).unwrap();
        let one = Field::constant(spec, 1.0);
        let v = integrate(&one, &one).unwrap();
        assert!((v - (2.0 * PI).powi(4)).abs() < 1e-9);
        let s = Field::from_fn(spec, |x| x[0].sin());
        assert!(integrate(&s, &one).unwrap().abs() < 1e-12);
        let s2 = Field::from_fn(spec, |x| x[0].sin().powi(2));
        assert!((integrate(&s2, &one).unwrap() - (2.0 * PI).powi(4) / 2.0).abs() < 1e-9);
        let other = Field::constant(GridSpec::new(10).unwrap(), 1.0);
        assert!(matches!(integrate(&one, &other), Err(Error::ShapeError(_))));
    }

    #[test]
    fn field_shape_checks() {
        let spec = GridSpec::new(4).unwrap();
        assert!(Field::new(spec, 1, vec![0.0; 256]).is_err());
        assert!(Field::new(spec, 1, vec![0.0; 1024]).is_ok());
        let mut d = vec![0.0; 256];
        d[3] = f64::INFINITY;
        assert!(Field::scalar(spec, d).is_err());
    }
}
