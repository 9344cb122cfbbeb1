//! Property tests over randomly drawn inputs.

use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use std::sync::OnceLock;
use weylkit::algebra::*;
use weylkit::curvature::{compute_curvature, CurvatureBundle};
use weylkit::field::{metric_family, Field, GridSpec, MetricFamily, Spectral, TrigPoly};
use weylkit::kato::{closed_form_det, determinant_check};
use weylkit::report::{d_alpha, ALPHA_MAX};
use weylkit::solver::{functional_d, EllipticOperator};

fn perturbed8() -> &'static CurvatureBundle {
    static B: OnceLock<CurvatureBundle> = OnceLock::new();
    B.get_or_init(|| compute_curvature(&metric_family(&MetricFamily::perturbed(0.05), &GridSpec::new(8).unwrap()).unwrap()).unwrap())
}

fn symmetric3() -> impl Strategy<Value = Mat3> {
    prop::array::uniform6(-5.0f64..5.0).prop_map(|e| Mat3::new(e[0], e[1], e[2], e[1], e[3], e[4], e[2], e[4], e[5]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues3_match_nalgebra(m in symmetric3(), shift in -1.0f64..1.0) {
        // Near-repeated spectra: blend towards a multiple of the identity.
        let m = m * 1e-3 + Mat3::identity() * shift;
        let ours = symmetric_eigenvalues3(&m);
        let mut o: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        o.sort_by(f64::total_cmp);
        let scale = m.amax().max(1e-300);
        for (a, b) in ours.iter().zip(&o) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{ours:?} {o:?}");
        }
    }

    #[test]
    fn weyl_norm_splits_and_contracts(seed in any::<u64>()) {
        let lf = LambdaFrame::standard();
        let w = random_algebraic_weyl(seed);
        let (p, m) = project_self_dual(&w, &lf).unwrap();
        prop_assert!((p.norm_sq() + m.norm_sq() - w.norm_sq()).abs() <= 1e-10 * w.norm_sq());
        prop_assert!(contract_ww(&w).unwrap().residual <= 1e-10 * w.norm_sq());
    }

    #[test]
    fn cubic_bound_for_chiral_spectra(a in -3.0f64..3.0, b in -3.0f64..3.0, plus in any::<bool>()) {
        let lf = LambdaFrame::standard();
        let chir = if plus { Chirality::Plus } else { Chirality::Minus };
        let w = weyl_from_eigenvalues(&lf, chir, [a, b, -a - b]);
        let c = cubic_contraction(&w.to_pair_matrix().unwrap());
        prop_assert!(c.abs() <= CUBIC_BOUND * w.norm_sq().powf(1.5) * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn kato_determinant_closed_form(l in -3.0f64..3.0, n in -3.0f64..3.0, k1 in -3.0f64..3.0, k2 in -3.0f64..3.0) {
        let c = determinant_check(l, n, k1, k2).unwrap();
        prop_assert!(c.residual < 1e-10);
        prop_assert_eq!(c.closed_form_det, closed_form_det(k1, k2));
    }

    #[test]
    fn spectral_gradient_is_exact_on_trig_polys(
        amps in prop::array::uniform3(-1.0f64..1.0),
        modes in prop::array::uniform3(prop::array::uniform4(-3i32..=3)),
    ) {
        let spec = GridSpec::new(8).unwrap();
        let mut f = TrigPoly::zero();
        for (a, k) in amps.iter().zip(modes) {
            f = f.plus(TrigPoly::sin(*a, k));
        }
        let sp = Spectral::new(&spec);
        let g = sp.gradient(f.to_field(&spec).data());
        for p in (0..spec.points()).step_by(97) {
            let exact = f.gradient(spec.coords(p), spec.periods());
            for a in 0..4 {
                prop_assert!((g[a][p] - exact[a]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn d_functional_is_scale_invariant(amp in 0.0f64..0.4, k in prop::array::uniform4(-2i32..=2), t in 0.1f64..10.0) {
        let spec = GridSpec::new(4).unwrap();
        let a = Field::from_fn(spec, |x| 1.0 + 0.5 * x[0].cos());
        let c = Field::from_fn(spec, |x| 0.3 + 0.2 * x[1].sin());
        let op = EllipticOperator::synthetic(&a, &c).unwrap();
        let f = TrigPoly::cos(amp, k);
        let v = Field::from_fn(spec, |x| f.eval(x, spec.periods()).exp());
        let tv = Field::from_fn(spec, |x| t * f.eval(x, spec.periods()).exp());
        let d1 = functional_d(&op, &v).unwrap();
        let d2 = functional_d(&op, &tv).unwrap();
        prop_assert!((d1 - d2).abs() <= 1e-12 * d1.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn d_alpha_is_affine(a1 in 0.0f64..ALPHA_MAX, a2 in 0.0f64..ALPHA_MAX, th in 0.0f64..1.0, plus in any::<bool>()) {
        let b = perturbed8();
        let s = if plus { Chirality::Plus } else { Chirality::Minus };
        let mid = d_alpha(b, th * a1 + (1.0 - th) * a2, s).unwrap();
        let (d1, d2) = (d_alpha(b, a1, s).unwrap(), d_alpha(b, a2, s).unwrap());
        prop_assert!((mid - (th * d1 + (1.0 - th) * d2)).abs() <= 1e-10 * d1.abs().max(d2.abs()));
    }
}
