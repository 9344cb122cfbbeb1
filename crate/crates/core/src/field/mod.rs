//! Periodic 4-torus grids, spectral differentiation, quadrature and field
//! dumps.

mod families;
mod grid;
mod io;
mod spectral;

pub use families::{metric_family, MetricFamily, TrigPoly, TrigTerm};
pub use grid::{integrate, integrate_slice, Field, GridSpec, MetricField};
pub use io::{dump_field, load_field, FieldSidecar};
pub use spectral::{spectral_derivative, Op, Spectral};
