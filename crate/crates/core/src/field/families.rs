use super::grid::{Field, GridSpec, MetricField};
use crate::{exec, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `amp · cos(Σ_a k_a (2π/L_a) x_a + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amp: f64,
    pub k: [i32; 4],
    pub phase: f64,
}

/// Finite sum of [`TrigTerm`]s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn cos(amp: f64, k: [i32; 4]) -> Self {
        Self { terms: vec![TrigTerm { amp, k, phase: 0.0 }] }
    }

    pub fn sin(amp: f64, k: [i32; 4]) -> Self {
        Self { terms: vec![TrigTerm { amp, k, phase: -std::f64::consts::FRAC_PI_2 }] }
    }

    pub fn plus(mut self, other: TrigPoly) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Largest `|k_a|` over all terms and axes.
    pub fn degree(&self) -> usize {
        self.terms.iter().flat_map(|t| t.k.iter()).map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    fn phase(t: &TrigTerm, x: [f64; 4], periods: [f64; 4]) -> f64 {
        (0..4).map(|a| t.k[a] as f64 * 2.0 * std::f64::consts::PI / periods[a] * x[a]).sum::<f64>() + t.phase
    }

    pub fn eval(&self, x: [f64; 4], periods: [f64; 4]) -> f64 {
        self.terms.iter().map(|t| t.amp * Self::phase(t, x, periods).cos()).sum()
    }

    pub fn gradient(&self, x: [f64; 4], periods: [f64; 4]) -> [f64; 4] {
        let mut g = [0.0; 4];
        for t in &self.terms {
            let s = Self::phase(t, x, periods).sin();
            for a in 0..4 {
                g[a] -= t.amp * s * t.k[a] as f64 * 2.0 * std::f64::consts::PI / periods[a];
            }
        }
        g
    }

    pub fn hessian(&self, x: [f64; 4], periods: [f64; 4]) -> [[f64; 4]; 4] {
        let mut h = [[0.0; 4]; 4];
        for t in &self.terms {
            let c = Self::phase(t, x, periods).cos();
            let w: [f64; 4] = std::array::from_fn(|a| t.k[a] as f64 * 2.0 * std::f64::consts::PI / periods[a]);
            for a in 0..4 {
                for b in 0..4 {
                    h[a][b] -= t.amp * c * w[a] * w[b];
                }
            }
        }
        h
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amp.abs()).sum()
    }

    pub fn to_field(&self, spec: &GridSpec) -> Field {
        let periods = spec.periods();
        Field::from_fn(*spec, |x| self.eval(x, periods))
    }
}

/// Metric families with closed-form components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "familyId", rename_all = "camelCase")]
pub enum MetricFamily {
    /// `g = δ`.
    Flat,
    /// `g = e^{2f} δ`.
    ConformallyFlat { f: TrigPoly },
    /// `g = δ + ε h`, with `h` listed over `i ≤ j` in row-major order.
    Perturbed { h: Vec<TrigPoly>, epsilon: f64 },
    /// `g = diag(e^{2 w_a})`.
    Anisotropic { warps: Vec<TrigPoly> },
    /// Anything built by other means, e.g. conformal rescaling.
    Derived { id: String, params: serde_json::Value },
}

impl MetricFamily {
    /// `h` with `modes` random terms per component, wavenumbers in
    /// `[-degree, degree]`, and per-component amplitude sum `0.45`, so that
    /// Gershgorin gives `λ_min(g) ≥ 1 - 1.8 ε`.
    pub fn perturbed_random(seed: u64, epsilon: f64, modes: usize, degree: i32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = (0..10)
            .map(|_| {
                let mut terms = Vec::with_capacity(modes);
                while terms.len() < modes {
                    let k: [i32; 4] = std::array::from_fn(|_| rng.gen_range(-degree..=degree));
                    if k == [0; 4] {
                        continue;
                    }
                    terms.push(TrigTerm {
                        amp: rng.gen_range(0.2..1.0),
                        k,
                        phase: rng.gen_range(0.0..std::f64::consts::TAU),
                    });
                }
                let s: f64 = terms.iter().map(|t| t.amp).sum();
                for t in &mut terms {
                    t.amp *= 0.45 / s;
                }
                TrigPoly { terms }
            })
            .collect();
        MetricFamily::Perturbed { h, epsilon }
    }

    /// The default seeded perturbation used throughout the tests.
    pub fn perturbed(epsilon: f64) -> Self {
        Self::perturbed_random(7, epsilon, 3, 1)
    }

    pub fn family_id(&self) -> &str {
        match self {
            MetricFamily::Flat => "flat",
            MetricFamily::ConformallyFlat { .. } => "conformallyFlat",
            MetricFamily::Perturbed { .. } => "perturbed",
            MetricFamily::Anisotropic { .. } => "anisotropic",
            MetricFamily::Derived { id, .. } => id,
        }
    }

    pub fn params(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let Some(o) = v.as_object_mut() {
            o.remove("familyId");
        }
        v
    }

    /// Trigonometric degree of the metric components' building blocks, or
    /// `None` for derived metrics.
    pub fn degree(&self) -> Option<usize> {
        match self {
            MetricFamily::Flat => Some(0),
            MetricFamily::ConformallyFlat { f } => Some(f.degree()),
            MetricFamily::Perturbed { h, .. } => Some(h.iter().map(TrigPoly::degree).max().unwrap_or(0)),
            MetricFamily::Anisotropic { warps } => Some(warps.iter().map(TrigPoly::degree).max().unwrap_or(0)),
            MetricFamily::Derived { .. } => None,
        }
    }

    /// Metric components at a point.
    pub fn eval(&self, x: [f64; 4], periods: [f64; 4]) -> Result<[f64; 16]> {
        let mut g = [0.0; 16];
        match self {
            MetricFamily::Flat => {
                for i in 0..4 {
                    g[i * 5] = 1.0;
                }
            }
            MetricFamily::ConformallyFlat { f } => {
                let e = (2.0 * f.eval(x, periods)).exp();
                for i in 0..4 {
                    g[i * 5] = e;
                }
            }
            MetricFamily::Perturbed { h, epsilon } => {
                if h.len() != 10 {
                    return Err(Error::InvalidMetric(format!("perturbation needs 10 components, got {}", h.len())));
                }
                let mut c = 0;
                for i in 0..4 {
                    for j in i..4 {
                        let v = if i == j { 1.0 } else { 0.0 } + epsilon * h[c].eval(x, periods);
                        g[i * 4 + j] = v;
                        g[j * 4 + i] = v;
                        c += 1;
                    }
                }
            }
            MetricFamily::Anisotropic { warps } => {
                if warps.len() != 4 {
                    return Err(Error::InvalidMetric(format!("anisotropic family needs 4 warps, got {}", warps.len())));
                }
                for i in 0..4 {
                    g[i * 5] = (2.0 * warps[i].eval(x, periods)).exp();
                }
            }
            MetricFamily::Derived { id, .. } => {
                return Err(Error::InvalidMetric(format!("derived family {id} has no closed form")));
            }
        }
        Ok(g)
    }
}

/// Evaluate a family on the grid and validate it.
///
/// Perturbed metrics must keep `λ_min > ½` everywhere. A grid coarser than
/// `antiAliasFactor × degree` is accepted with a warning.
pub fn metric_family(family: &MetricFamily, spec: &GridSpec) -> Result<MetricField> {
    if let Some(d) = family.degree() {
        if (spec.n() as f64) < spec.required_n(d) {
            log::warn!(
                "n = {} is below {} × degree {d} for family {}; expect aliasing",
                spec.n(),
                spec.anti_alias_factor(),
                family.family_id()
            );
        }
    }
    let periods = spec.periods();
    let vals = exec::map(spec.points(), |p| family.eval(spec.coords(p), periods));
    let mut data = Vec::with_capacity(spec.points() * 16);
    for v in vals {
        data.extend_from_slice(&v?);
    }
    let field = Field::new(*spec, 2, data).map_err(|e| Error::InvalidMetric(e.to_string()))?;
    let m = MetricField::new(field, family.clone())?;
    if let MetricFamily::Perturbed { .. } = family {
        let lmin = m.min_eigenvalue();
        if lmin <= 0.5 {
            return Err(Error::InvalidMetric(format!("perturbation too large: minimum eigenvalue {lmin:.4}")));
        }
    }
    Ok(m)
}
