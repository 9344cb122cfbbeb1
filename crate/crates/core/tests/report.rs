use std::sync::OnceLock;
use weylkit::algebra::Chirality;
use weylkit::curvature::{compute_curvature, CurvatureBundle};
use weylkit::field::{metric_family, GridSpec, MetricFamily, TrigPoly};
use weylkit::identities::d_functional_direct;
use weylkit::report::*;
use weylkit::Error;

fn bundle(family: MetricFamily, n: usize) -> CurvatureBundle {
    compute_curvature(&metric_family(&family, &GridSpec::new(n).unwrap()).unwrap()).unwrap()
}

fn perturbed12() -> &'static CurvatureBundle {
    static B: OnceLock<CurvatureBundle> = OnceLock::new();
    B.get_or_init(|| bundle(MetricFamily::perturbed(0.05), 12))
}

fn grid() -> Vec<f64> {
    parse_alpha_grid("0:0.05:0.5556").unwrap()
}

#[test]
fn alpha_grid_parsing() {
    let g = grid();
    assert_eq!(g.len(), 13);
    assert_eq!(g[0], 0.0);
    assert_eq!(*g.last().unwrap(), ALPHA_MAX);
    assert_eq!(parse_alpha_grid("0.1, 1/3").is_err(), true);
    assert_eq!(parse_alpha_grid("0.25,0.5").unwrap(), vec![0.25, 0.5]);
    assert!(matches!(parse_alpha_grid("0:0.1:0.7"), Err(Error::OutOfRange(_))));
    assert!(matches!(parse_alpha_grid("0:0:0.5"), Err(Error::OutOfRange(_))));
}

#[test]
fn flat_metric_report() {
    let b = bundle(MetricFamily::Flat, 8);
    for a in [0.0, 1.0 / 3.0, ALPHA_MAX] {
        assert_eq!(d_alpha(&b, a, Chirality::Plus).unwrap(), 0.0);
        assert_eq!(d_alpha(&b, a, Chirality::Minus).unwrap(), 0.0);
    }
    assert_eq!(yamabe_upper_bound(&b, 10).unwrap(), 0.0);
    let r = pinching_report(&b, &grid()).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert!(r.vacuous_plus && r.vacuous_minus);
    assert_eq!((r.chi, r.tau), (0, 0));
    assert_eq!(r.positive_yamabe, HypothesisStatus::Violated);
    for row in &r.rows {
        assert_eq!(row.corollary_threshold_plus, 0.0);
        assert_eq!(row.corollary_threshold_minus, 0.0);
        assert_eq!(row.weyl_pinching_plus, HypothesisStatus::Vacuous);
        assert_eq!(row.d_alpha_nonpositive_minus, HypothesisStatus::Vacuous);
    }
    assert_eq!(r.to_csv().lines().count(), 1 + r.rows.len());
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["schemaVersion"], 1);
    assert!(json["alphaGrid"].is_array() && json["wPlusL2"].is_number() && json["gurskyRhs"].is_number());
}

#[test]
fn conformally_flat_functionals_vanish() {
    let f = TrigPoly::sin(0.05, [1, 1, 0, 0]).plus(TrigPoly::cos(0.04, [0, 0, 1, -1]));
    let b = bundle(MetricFamily::ConformallyFlat { f }, 16);
    for a in grid() {
        for s in [Chirality::Plus, Chirality::Minus] {
            assert!(d_alpha(&b, a, s).unwrap().abs() < 1e-8);
        }
    }
}

#[test]
fn alpha_out_of_range() {
    let b = bundle(MetricFamily::Flat, 4);
    for a in [-0.01, 0.56, f64::NAN] {
        assert!(matches!(d_alpha(&b, a, Chirality::Plus), Err(Error::OutOfRange(_))));
    }
    assert!(matches!(pinching_report(&b, &[0.0, 0.6]), Err(Error::OutOfRange(_))));
}

#[test]
fn d_alpha_on_perturbed_metric() {
    let b = perturbed12();
    let vol = b.total_volume();
    for s in [Chirality::Plus, Chirality::Minus] {
        let dw: f64 = b.integrate(|p| {
            let d = b.div_weyl_chiral(p, s);
            2.0 * d.iter().flatten().map(|x| x * x).sum::<f64>()
        });
        let w2 = |p: usize| {
            let m = b.weyl_chiral_frame(p, s);
            4.0 * m.norm_squared()
        };
        let rw = b.integrate(|p| b.point(p).scalar * w2(p));
        let top = d_alpha(b, ALPHA_MAX, s).unwrap();
        assert!((top - vol.sqrt() * dw).abs() <= 1e-12 * top.abs());
        let third = d_alpha(b, 1.0 / 3.0, s).unwrap();
        let expected = vol.sqrt() * (dw - rw / 12.0);
        assert!((third - expected).abs() <= 1e-12 * expected.abs().max(top.abs()), "{third} {expected}");
    }
    // the unsplit functional is the sum over both chiralities
    let total = d_alpha(b, ALPHA_MAX, Chirality::Plus).unwrap() + d_alpha(b, ALPHA_MAX, Chirality::Minus).unwrap();
    let direct = d_functional_direct(b);
    assert!(total > 0.0 && direct > 0.0);
}

#[test]
fn yamabe_descent_decreases_from_constant() {
    let b = perturbed12();
    let y = yamabe_descent(b, 200).unwrap();
    let vol = b.total_volume();
    let constant = b.integrate(|p| b.point(p).scalar) / vol.sqrt();
    assert!((y.constant_value - constant).abs() <= 1e-12 * constant.abs().max(1e-12));
    assert!(y.value <= y.constant_value);
    assert!(y.history.windows(2).all(|w| w[1] <= w[0]));
    assert!(y.iterations > 0);
}

#[test]
fn perturbed_report_checks() {
    let b = perturbed12();
    let r = pinching_report(b, &grid()).unwrap();
    for c in &r.checks {
        if c.asserted {
            assert!(c.passed, "{} {:e}", c.name, c.value);
        }
    }
    assert!(!r.check("sigma2Relation+").unwrap().passed);
    assert!(r.w_plus_l2 > 0.0 && r.w_minus_l2 > 0.0);
    assert!(!r.vacuous_plus && !r.vacuous_minus);
    // pinching quantity at α = 0 is 𝒲± itself
    assert_eq!(r.rows[0].pinching_plus, r.w_plus_l2);
    // 𝔇α is affine, so the grid values lie on one line
    let (f0, f1) = (r.d_alpha_plus[0], *r.d_alpha_plus.last().unwrap());
    for (a, v) in r.alpha_grid.iter().zip(&r.d_alpha_plus) {
        let line = f0 + (f1 - f0) * a / ALPHA_MAX;
        assert!((v - line).abs() < 1e-10 * f0.abs().max(f1.abs()));
    }
    if r.yamabe_upper <= 0.0 {
        assert_eq!(r.positive_yamabe, HypothesisStatus::Violated);
    }
}
