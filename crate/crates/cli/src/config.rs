//! Run configuration. A TOML file with `[metric]`, `[grid]`, `[solver]` and
//! `[report]` sections; every key is optional and command-line flags win.

use serde::Deserialize;
use std::path::Path;
use weylkit::field::{GridSpec, MetricFamily, TrigPoly, TrigTerm};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub metric: MetricSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub report: ReportSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub amp: f64,
    pub k: [i32; 4],
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    /// `flat`, `conformallyFlat`, `perturbed` or `anisotropic`.
    pub family: Option<String>,
    pub epsilon: Option<f64>,
    /// Random perturbation: seed, terms per component and max wavenumber.
    pub seed: Option<u64>,
    pub modes: Option<usize>,
    pub degree: Option<i32>,
    /// Explicit perturbation, ten components over `i ≤ j`.
    pub h: Option<Vec<Vec<Term>>>,
    /// Conformal exponent of `conformallyFlat`.
    pub f: Option<Vec<Term>>,
    /// Four diagonal exponents of `anisotropic`.
    pub warps: Option<Vec<Vec<Term>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
    pub periods: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Euler-Lagrange tolerance of the descent.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// `auto` (degenerate branch when `W` vanishes somewhere),
    /// `nondegenerate` or `degenerate`.
    pub mode: Option<String>,
    /// Start the descent from a random positive field with this seed
    /// instead of `φ₁`.
    pub init_seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub alpha: Option<String>,
    pub yamabe_iterations: Option<usize>,
    pub k_grid: Option<Vec<f64>>,
}

fn poly(terms: &[Term]) -> TrigPoly {
    TrigPoly { terms: terms.iter().map(|t| TrigTerm { amp: t.amp, k: t.k, phase: t.phase }).collect() }
}

pub const DEFAULT_N: usize = 12;

impl Config {
    /// `source` is a TOML file, or a bare family name for its defaults.
    pub fn load(source: &str) -> Result<Self, String> {
        let path = Path::new(source);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{source}: {e}"))?;
            return toml::from_str(&text).map_err(|e| format!("{source}: {e}"));
        }
        match source {
            "flat" | "conformallyFlat" | "perturbed" | "anisotropic" => {
                Ok(Config { metric: MetricSection { family: Some(source.into()), ..Default::default() }, ..Default::default() })
            }
            _ => Err(format!("{source}: no such file, and not a family name")),
        }
    }

    pub fn grid(&self, n: Option<usize>) -> weylkit::Result<GridSpec> {
        let n = n.or(self.grid.n).unwrap_or(DEFAULT_N);
        match self.grid.periods {
            Some(p) => GridSpec::with_periods(n, p),
            None => GridSpec::new(n),
        }
    }

    pub fn family(&self) -> Result<MetricFamily, String> {
        let m = &self.metric;
        let family = m.family.as_deref().unwrap_or("perturbed");
        Ok(match family {
            "flat" => MetricFamily::Flat,
            "conformallyFlat" => {
                let f = match &m.f {
                    Some(t) => poly(t),
                    None => TrigPoly::sin(0.05, [1, 1, 0, 0])
                        .plus(TrigPoly::sin(0.05, [1, -1, 0, 0]))
                        .plus(TrigPoly::cos(0.04, [0, 0, 1, -1])),
                };
                MetricFamily::ConformallyFlat { f }
            }
            "perturbed" => {
                let epsilon = m.epsilon.unwrap_or(0.05);
                match &m.h {
                    Some(h) => MetricFamily::Perturbed { h: h.iter().map(|c| poly(c)).collect(), epsilon },
                    None => MetricFamily::perturbed_random(m.seed.unwrap_or(7), epsilon, m.modes.unwrap_or(3), m.degree.unwrap_or(1)),
                }
            }
            "anisotropic" => {
                let warps = match &m.warps {
                    Some(w) => w.iter().map(|c| poly(c)).collect(),
                    None => (0..4).map(|a| TrigPoly::sin(0.05, std::array::from_fn(|b| i32::from(b == (a + 1) % 4)))).collect(),
                };
                MetricFamily::Anisotropic { warps }
            }
            other => return Err(format!("unknown metric family '{other}'")),
        })
    }
}
