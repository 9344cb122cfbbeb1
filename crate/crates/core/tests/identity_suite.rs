use std::sync::OnceLock;
use weylkit::curvature::{compute_curvature, CurvatureBundle};
use weylkit::field::{metric_family, Field, GridSpec, MetricFamily, TrigPoly};
use weylkit::identities::*;
use weylkit::Error;

fn perturbed(n: usize) -> CurvatureBundle {
    compute_curvature(&metric_family(&MetricFamily::perturbed(0.05), &GridSpec::new(n).unwrap()).unwrap()).unwrap()
}

fn perturbed16() -> &'static CurvatureBundle {
    static B: OnceLock<CurvatureBundle> = OnceLock::new();
    B.get_or_init(|| perturbed(16))
}

fn conformal_f() -> TrigPoly {
    TrigPoly::sin(0.05, [1, 1, 0, 0]).plus(TrigPoly::sin(0.05, [1, -1, 0, 0])).plus(TrigPoly::cos(0.04, [0, 0, 1, -1]))
}

fn by_id<'a>(reports: &'a [IdentityReport], id: &str) -> &'a IdentityReport {
    reports.iter().find(|r| r.identity_id == id).unwrap_or_else(|| panic!("no report {id}"))
}

#[test]
fn flat_metric_residuals_vanish() {
    let b = compute_curvature(&metric_family(&MetricFamily::Flat, &GridSpec::new(8).unwrap()).unwrap()).unwrap();
    for r in all_identities(&b).unwrap() {
        assert!(r.pointwise_max_residual.unwrap_or(0.0) < 1e-12, "{}", r.identity_id);
        assert!(r.integral_residual < 1e-12, "{}", r.identity_id);
        assert!(r.integrals.values().all(|v| v.abs() < 1e-12), "{}", r.identity_id);
    }
    let gb = gauss_bonnet_signature(&b).unwrap();
    assert_eq!(by_id(&gb, "gaussBonnet").integral_residual, 0.0);
    assert_eq!(by_id(&gb, "signature").integral_residual, 0.0);
}

#[test]
fn conformally_flat_residuals_vanish() {
    let spec = GridSpec::new(16).unwrap();
    let b = compute_curvature(&metric_family(&MetricFamily::ConformallyFlat { f: conformal_f() }, &spec).unwrap()).unwrap();
    for r in weitzenboeck_residual(&b).unwrap().iter().chain(&weyl_gradient_identity(&b).unwrap()) {
        assert!(r.pointwise_max_residual.unwrap() < 1e-8, "{} {:?}", r.identity_id, r.pointwise_max_residual);
        assert!(r.integral_residual < 1e-8, "{}", r.identity_id);
    }
    let r2 = b.integrate(|p| b.point(p).scalar.powi(2));
    let gb = gauss_bonnet_signature(&b).unwrap();
    for id in ["gaussBonnet", "signature"] {
        assert!(by_id(&gb, id).integral_residual < 1e-8 * r2, "{id}");
    }
}

#[test]
fn weitzenboeck_on_perturbed_metric() {
    let b = perturbed16();
    let reports = weitzenboeck_residual(b).unwrap();
    assert_eq!(reports.len(), 3);
    for r in &reports {
        let grad = r.integral("gradSq");
        assert!(grad > 0.0);
        assert!(r.pointwise_rel_residual.unwrap() < 1e-5, "{} {:?}", r.identity_id, r.pointwise_rel_residual);
        assert!(r.integral_residual < 1e-6 * grad, "{} {:e}", r.identity_id, r.integral_residual / grad);
    }
    for r in weyl_gradient_identity(b).unwrap() {
        assert!(r.pointwise_rel_residual.unwrap() < 1e-5, "{}", r.identity_id);
        assert!(r.integral_residual < 1e-6 * r.integral("minusHalfGradSq").abs(), "{}", r.identity_id);
    }
    // |W|² = |W⁺|² + |W⁻|² splits the integrated gradient terms too.
    let full = reports[0].integral("gradSq");
    let split = reports[1].integral("gradSq") + reports[2].integral("gradSq");
    assert!((full - split).abs() < 1e-10 * full);
}

#[test]
fn residuals_converge_spectrally() {
    let coarse = perturbed(8);
    let fine = perturbed16();
    let pairs = [
        (weitzenboeck_residual(&coarse).unwrap(), weitzenboeck_residual(fine).unwrap()),
        (weyl_gradient_identity(&coarse).unwrap()[..1].to_vec(), weyl_gradient_identity(fine).unwrap()[..1].to_vec()),
    ];
    for (c, f) in pairs.iter() {
        for (rc, rf) in c.iter().zip(f) {
            let (pc, pf) = (rc.pointwise_rel_residual.unwrap(), rf.pointwise_rel_residual.unwrap());
            assert!(pf * 10.0 <= pc, "{}: {pc:e} -> {pf:e}", rc.identity_id);
        }
    }
}

#[test]
fn contraction_identity_holds_pointwise() {
    for r in contraction_identity(perturbed16()) {
        assert!(r.pointwise_rel_residual.unwrap() < 1e-12, "{} {:?}", r.identity_id, r.pointwise_rel_residual);
    }
}

#[test]
fn topological_integrals_vanish_on_torus() {
    let b = perturbed16();
    let gb = gauss_bonnet_signature(b).unwrap();
    let g = by_id(&gb, "gaussBonnet");
    let w2 = g.integral("normWeylPlusSq") + g.integral("normWeylMinusSq");
    assert!(w2 > 0.0);
    assert!(g.integral_residual < 1e-6 * w2);
    assert!(by_id(&gb, "signature").integral_residual < 1e-6 * w2);
    let gursky = by_id(&gb, "gurskyForms");
    assert!(gursky.integral_rel_residual < 1e-8);
    // 8∫σ₂ = -∫|W±|² on T⁴; the form with +∫|W±|² does not hold.
    for s in ["+", "-"] {
        assert!(by_id(&gb, &format!("sigma2CombinationCorrected{s}")).integral_rel_residual < 1e-8);
        assert!(by_id(&gb, &format!("sigma2Combination{s}")).integral_rel_residual > 1.0);
    }
}

#[test]
fn conformal_invariance() {
    let b = perturbed16();
    let spec = *b.spec();
    for (u, tol) in [(Field::constant(spec, 0.0), 0.0), (Field::constant(spec, 0.7), 1e-12), (Field::from_fn(spec, |x| 0.1 * x[1].sin()), 1e-6)] {
        for r in conformal_invariants(b, &u).unwrap() {
            assert!(r.integral_rel_residual <= tol, "{} {:e}", r.identity_id, r.integral_rel_residual);
        }
    }
}

#[test]
fn d_functional_formula_matches_direct_bundle() {
    let b = perturbed16();
    let spec = *b.spec();
    let v = Field::from_fn(spec, |x| (-0.1 * x[2].sin()).exp());
    let r = d_functional_consistency(b, &v).unwrap();
    assert!(r.integral_rel_residual < 1e-6, "{:e}", r.integral_rel_residual);
    // v = 1 reduces to the direct value on g₀.
    let one = d_functional_conformal_factor(b, &Field::constant(spec, 1.0)).unwrap();
    let direct = d_functional_direct(b);
    assert!((one - direct).abs() < 1e-12 * direct);
    assert!(matches!(d_functional_conformal_factor(b, &Field::constant(spec, -1.0)), Err(Error::InvalidConformalFactor(_))));
}
