use super::grid::{Field, GridSpec};
use crate::exec;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Fourier multiplier applied by [`Spectral::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Identity,
    /// `∂_a`.
    D(usize),
    /// `∂_a ∂_b`, the square of the first-derivative multipliers.
    DD(usize, usize),
}

/// FFT-based differentiation on a [`GridSpec`].
///
/// The first-derivative multiplier `i k` has its Nyquist entry set to zero,
/// which keeps it real and skew-symmetric; second derivatives are products
/// of first-derivative multipliers.
pub struct Spectral {
    spec: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: [Vec<f64>; 4],
}

impl Spectral {
    pub fn new(spec: &GridSpec) -> Self {
        let n = spec.n();
        let mut planner = FftPlanner::new();
        let wavenumbers = std::array::from_fn(|a| {
            (0..n)
                .map(|m| {
                    let s = if m < n / 2 {
                        m as f64
                    } else if m == n / 2 {
                        0.0
                    } else {
                        m as f64 - n as f64
                    };
                    2.0 * PI * s / spec.periods()[a]
                })
                .collect()
        });
        Self { spec: *spec, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), wavenumbers }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let n = self.spec.n();
        let fft = if forward { &self.forward } else { &self.inverse };
        let lines_per_task = (n * n).max(1);
        exec::for_chunks(data, n * lines_per_task, |_, c| fft.process(c));
        let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
        for axis in (0..3).rev() {
            let s = n.pow(3 - axis as u32);
            {
                let src = &*data;
                exec::fill(&mut lines, |t| {
                    let l = t / n;
                    let j = t % n;
                    src[(l / s) * (n * s) + j * s + l % s]
                });
            }
            exec::for_chunks(&mut lines, n * lines_per_task, |_, c| fft.process(c));
            let src = &lines;
            exec::fill(data, |idx| {
                let outer = idx / (n * s);
                let rem = idx % (n * s);
                src[(outer * s + rem % s) * n + rem / s]
            });
        }
        if !forward {
            let scale = 1.0 / data.len() as f64;
            exec::for_chunks(data, 4096, |_, c| c.iter_mut().for_each(|z| *z *= scale));
        }
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut z, true);
        z
    }

    /// Forward transforms of two real fields with a single complex FFT.
    pub fn forward_pair(&self, f: &[f64], g: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut z: Vec<Complex64> = f.iter().zip(g).map(|(&a, &b)| Complex64::new(a, b)).collect();
        self.transform(&mut z, true);
        let n = self.spec.n();
        let mirror = |p: usize| {
            let i = self.spec.multi_index(p);
            self.spec.index(std::array::from_fn(|a| (n - i[a]) % n))
        };
        let zr = &z;
        let fh = exec::map(z.len(), |p| (zr[p] + zr[mirror(p)].conj()) * 0.5);
        let gh = exec::map(z.len(), |p| (zr[p] - zr[mirror(p)].conj()) * Complex64::new(0.0, -0.5));
        (fh, gh)
    }

    #[inline]
    fn multiplier(&self, op: Op, p: usize) -> Complex64 {
        let i = self.spec.multi_index(p);
        match op {
            Op::Identity => Complex64::new(1.0, 0.0),
            Op::D(a) => Complex64::new(0.0, self.wavenumbers[a][i[a]]),
            Op::DD(a, b) => Complex64::new(-self.wavenumbers[a][i[a]] * self.wavenumbers[b][i[b]], 0.0),
        }
    }

    /// Inverse transform of `op₁·F̂` and `op₂·F̂`, both real, packed into one
    /// complex FFT.
    fn inverse_two(&self, fh: &[Complex64], a: Op, b: Option<Op>) -> (Vec<f64>, Option<Vec<f64>>) {
        let im = Complex64::new(0.0, 1.0);
        let mut z = exec::map(fh.len(), |p| {
            let mut v = self.multiplier(a, p) * fh[p];
            if let Some(b) = b {
                v += im * self.multiplier(b, p) * fh[p];
            }
            v
        });
        self.transform(&mut z, false);
        let re = z.iter().map(|c| c.re).collect();
        let imv = b.map(|_| z.iter().map(|c| c.im).collect());
        (re, imv)
    }

    /// `ops[k] f` for each requested multiplier: one forward and
    /// `⌈len/2⌉` inverse transforms.
    pub fn apply(&self, f: &[f64], ops: &[Op]) -> Vec<Vec<f64>> {
        let fh = self.forward(f);
        self.apply_hat(&fh, ops)
    }

    pub fn apply_hat(&self, fh: &[Complex64], ops: &[Op]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(ops.len());
        for pair in ops.chunks(2) {
            let (a, b) = self.inverse_two(fh, pair[0], pair.get(1).copied());
            out.push(a);
            if let Some(b) = b {
                out.push(b);
            }
        }
        out
    }

    pub fn derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        self.apply(f, &[Op::D(axis)]).pop().expect("one output")
    }

    pub fn gradient(&self, f: &[f64]) -> [Vec<f64>; 4] {
        let mut v = self.apply(f, &[Op::D(0), Op::D(1), Op::D(2), Op::D(3)]).into_iter();
        std::array::from_fn(|_| v.next().expect("four outputs"))
    }

    /// Gradient and the ten second derivatives `∂_a∂_b`, `a ≤ b`, in
    /// row-major upper-triangular order.
    pub fn gradient_hessian(&self, f: &[f64]) -> ([Vec<f64>; 4], [Vec<f64>; 10]) {
        let mut ops = vec![Op::D(0), Op::D(1), Op::D(2), Op::D(3)];
        for a in 0..4 {
            for b in a..4 {
                ops.push(Op::DD(a, b));
            }
        }
        let mut v = self.apply(f, &ops).into_iter();
        let g = std::array::from_fn(|_| v.next().expect("gradient"));
        let h = std::array::from_fn(|_| v.next().expect("hessian"));
        (g, h)
    }

    /// `Σ_a ∂_a F_a`.
    pub fn divergence(&self, comps: [&[f64]; 4]) -> Vec<f64> {
        let (h0, h1) = self.forward_pair(comps[0], comps[1]);
        let (h2, h3) = self.forward_pair(comps[2], comps[3]);
        let hats = [h0, h1, h2, h3];
        let mut z = exec::map(hats[0].len(), |p| {
            (0..4).map(|a| self.multiplier(Op::D(a), p) * hats[a][p]).sum::<Complex64>()
        });
        self.transform(&mut z, false);
        z.iter().map(|c| c.re).collect()
    }

    /// Fraction of the spectral energy of `f` on the Nyquist shell
    /// `max_a |m_a| = n/2`.
    pub fn top_mode_fraction(&self, f: &[f64]) -> f64 {
        let fh = self.forward(f);
        let n = self.spec.n();
        let mut top = 0.0;
        let mut total = 0.0;
        for (p, c) in fh.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if self.spec.multi_index(p).iter().any(|&m| m == n / 2) {
                top += e;
            }
        }
        if total > 0.0 {
            top / total
        } else {
            0.0
        }
    }
}

/// Fourier-multiplier derivative of a scalar field along `axis`.
pub fn spectral_derivative(f: &Field, axis: usize) -> crate::Result<Field> {
    if f.rank() != 0 {
        return Err(crate::Error::ShapeError("spectral derivative of a non-scalar field".into()));
    }
    if axis >= 4 {
        return Err(crate::Error::ShapeError(format!("axis {axis} out of range")));
    }
    let s = Spectral::new(f.spec());
    Field::scalar(*f.spec(), s.derivative(f.data(), axis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn derivative_of_resolved_modes() {
        let spec = GridSpec::new(16).unwrap();
        let c = Field::constant(spec, 3.0);
        assert!(spectral_derivative(&c, 2).unwrap().max_abs() < 1e-12);
        for axis in 0..4 {
            let f = Field::from_fn(spec, |x| x[axis].sin());
            let d = spectral_derivative(&f, axis).unwrap();
            let want = Field::from_fn(spec, |x| x[axis].cos());
            assert!(max_diff(d.data(), want.data()) < 1e-12);
        }
    }

    #[test]
    fn resolution_independence_below_nyquist() {
        let at = |n: usize| {
            let spec = GridSpec::new(n).unwrap();
            let f = Field::from_fn(spec, |x| (7.0 * x[0]).sin());
            let d = spectral_derivative(&f, 0).unwrap();
            // Sample on the common coarse lattice.
            let stride = n / 16;
            let coarse = GridSpec::new(16).unwrap();
            (0..coarse.points())
                .map(|p| {
                    let i = coarse.multi_index(p);
                    d.data()[spec.index(i.map(|k| k * stride))]
                })
                .collect::<Vec<_>>()
        };
        assert!(max_diff(&at(16), &at(32)) < 1e-11);
    }

    #[test]
    fn hessian_and_divergence() {
        let spec = GridSpec::with_periods(8, [1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = Spectral::new(&spec);
        let k = spec.periods().map(|l| 2.0 * PI / l);
        let f = Field::from_fn(spec, |x| (k[0] * x[0] + 2.0 * k[2] * x[2]).sin() + (k[1] * x[1] - k[3] * x[3]).cos());
        let (g, h) = s.gradient_hessian(f.data());
        let want_g0 = Field::from_fn(spec, |x| k[0] * (k[0] * x[0] + 2.0 * k[2] * x[2]).cos());
        let want_h02 = Field::from_fn(spec, |x| -2.0 * k[0] * k[2] * (k[0] * x[0] + 2.0 * k[2] * x[2]).sin());
        let want_h13 = Field::from_fn(spec, |x| k[1] * k[3] * (k[1] * x[1] - k[3] * x[3]).cos());
        assert!(max_diff(&g[0], want_g0.data()) < 1e-11);
        assert!(max_diff(&h[2], want_h02.data()) < 1e-10);
        assert!(max_diff(&h[6], want_h13.data()) < 1e-10);
        let c: Vec<Vec<f64>> = (0..4).map(|a| Field::from_fn(spec, move |x| (k[a] * x[a] + 0.3).sin()).into_data()).collect();
        let div = s.divergence([&c[0], &c[1], &c[2], &c[3]]);
        let want = Field::from_fn(spec, |x| (0..4).map(|a| k[a] * (k[a] * x[a] + 0.3).cos()).sum());
        assert!(max_diff(&div, want.data()) < 1e-11);
    }

    #[test]
    fn nyquist_shell_fraction() {
        let spec = GridSpec::new(8).unwrap();
        let s = Spectral::new(&spec);
        let f = Field::from_fn(spec, |x| x[1].cos());
        assert!(s.top_mode_fraction(f.data()) < 1e-28);
        let g = Field::from_fn(spec, |x| (4.0 * x[1]).cos());
        assert!((s.top_mode_fraction(g.data()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_and_sequential_transforms_agree() {
        let spec = GridSpec::new(8).unwrap();
        let s = Spectral::new(&spec);
        let f = Field::from_fn(spec, |x| (x[0] + 2.0 * x[3]).sin() * x[1].cos());
        let a = s.derivative(f.data(), 3);
        let b = exec::sequential(|| s.derivative(f.data(), 3));
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
