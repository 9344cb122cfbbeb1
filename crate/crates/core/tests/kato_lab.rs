use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weylkit::curvature::compute_curvature;
use weylkit::field::{metric_family, GridSpec, MetricFamily};
use weylkit::kato::*;

type T4 = [[[[f64; 4]; 4]; 4]; 4];

fn two_form(entries: &[(usize, usize, f64)]) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for &(i, j, v) in entries {
        m[i][j] = v;
        m[j][i] = -v;
    }
    m
}

/// Quaternionic basis `ω, η, θ` of Λ⁺ with `ωη = θ`, `ηθ = ω`, `θω = η`.
fn quaternions() -> [[[f64; 4]; 4]; 3] {
    [
        two_form(&[(0, 1, 1.0), (2, 3, 1.0)]),
        two_form(&[(0, 3, 1.0), (1, 2, 1.0)]),
        two_form(&[(0, 2, 1.0), (1, 3, -1.0)]),
    ]
}

fn outer(s: &[[f64; 3]; 3], b: &[[[f64; 4]; 4]; 3]) -> T4 {
    let mut t = [[[[0.0; 4]; 4]; 4]; 4];
    for x in 0..3 {
        for y in 0..3 {
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            t[i][j][k][l] += 0.5 * s[x][y] * b[x][i][j] * b[y][k][l];
                        }
                    }
                }
            }
        }
    }
    t
}

fn dot(a: &T4, b: &T4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    s += a[i][j][k][l] * b[i][j][k][l];
                }
            }
        }
    }
    s
}

/// Build `W⁺ = ½Σ λ_A β_A ⊗ β_A` and a general `∇W⁺` from the one-forms
/// `dλ, dν, ā, b̄, c̄`, evaluate `|∇W⁺|²`, `|∇|W⁺||²`, `|δW⁺|²` by brute
/// force and compare with the quadratic forms on `(dλ, dν, X, Y, Z)`.
#[test]
fn quadratic_forms_reproduce_brute_force_expansions() {
    let q = quaternions();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases: Vec<(f64, f64)> = vec![(1.0, -2.0)];
    for _ in 0..40 {
        cases.push((rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
    }
    for (l, n) in cases {
        let m = -l - n;
        let f: Vec<[f64; 4]> = (0..5).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
        let (dl, dn, ab, bb, cb) = (f[0], f[1], f[2], f[3], f[4]);
        let w = outer(&[[l, 0.0, 0.0], [0.0, m, 0.0], [0.0, 0.0, n]], &q);
        let dw: Vec<T4> = (0..4)
            .map(|t| {
                let dm = -dl[t] - dn[t];
                outer(&[[dl[t], cb[t], -bb[t]], [cb[t], dm, ab[t]], [-bb[t], ab[t], dn[t]]], &q)
            })
            .collect();
        let grad2: f64 = dw.iter().map(|d| dot(d, d)).sum();
        let norm = dot(&w, &w).sqrt();
        let dnorm2: f64 = dw.iter().map(|d| (dot(&w, d) / norm).powi(2)).sum();
        let mut div2 = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                for l2 in 0..4 {
                    let s: f64 = (0..4).map(|t| dw[t][t][j][k][l2]).sum();
                    div2 += s * s;
                }
            }
        }
        let contract = |m: &[[f64; 4]; 4], v: &[f64; 4], sign: f64| -> [f64; 4] {
            std::array::from_fn(|j| sign * (0..4).map(|i| m[i][j] * v[i]).sum::<f64>())
        };
        let basis = [dl, dn, contract(&q[0], &ab, -1.0), contract(&q[1], &bb, 1.0), contract(&q[2], &cb, -1.0)];
        let gram = |mat: &Mat5| -> f64 {
            let mut s = 0.0;
            for a in 0..5 {
                for b in 0..5 {
                    s += mat[(a, b)] * (0..4).map(|t| basis[a][t] * basis[b][t]).sum::<f64>();
                }
            }
            s
        };
        let km = assemble_mq(l, n, 0.5).unwrap();
        for (brute, form) in [(grad2, gram(&km.m_nabla_w)), (dnorm2, gram(&km.m_nabla_norm_w)), (div2, gram(&km.m_div_w))] {
            assert!((brute - form).abs() < 1e-10 * brute.abs().max(1.0), "{brute} vs {form} at λ={l} ν={n}");
        }
    }
}

#[test]
fn determinant_closed_form_over_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (l, n) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (k1, k2) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        worst = worst.max(determinant_check(l, n, k1, k2).unwrap().residual);
    }
    assert!(worst < 1e-10, "{worst:e}");
    assert!((determinant_check(0.4, 1.1, 0.0, 0.0).unwrap().numeric_det - 24576.0).abs() < 1e-9);
}

#[test]
fn determinant_vanishes_on_the_admissible_curve() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..200 {
        let k = K_MAX * i as f64 / 200.0;
        let (l, n) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let c = determinant_check(l, n, kato_k1(k), k).unwrap();
        let k1 = kato_k1(k);
        assert!(c.closed_form_det.abs() < 1e-12 * 384.0 * (8.0 + 5.0 * k1).powi(2).max(1.0));
        assert!(c.residual < 1e-10, "k={k} {c:?}");
    }
}

#[test]
fn minors_of_orders_two_and_four_match_and_order_three_needs_three_minus_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..7 {
        let k = 0.25 * i as f64;
        for _ in 0..50 {
            let (l, n) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let r = minors_and_psd(l, n, k).unwrap();
            assert!(r.psd, "k={k} λ={l} ν={n} min eig {}", r.min_eigenvalue);
            for m in &r.minors {
                assert!(m.corrected_residual < 1e-10, "{m:?}");
                if m.order != 3 {
                    assert!(m.displayed_residual < 1e-10, "{m:?}");
                }
            }
        }
    }
    // Off k ∈ {0, 1} and off λν + ν² = 0 the printed order-three value is not a minor.
    let r = minors_and_psd(1.0, 1.0, 0.5).unwrap();
    assert!(r.minors[1].displayed_residual > 1e-3);
    assert!(minors_and_psd(1.0, 1.0, 0.0).unwrap().minors[1].displayed_residual < 1e-12);
}

#[test]
fn psd_near_the_upper_end() {
    for k in [1.6, 1.65, 1.666] {
        for (l, n) in [(1.0, -2.0), (1.0, 1.0), (-0.3, 2.0)] {
            let r = minors_and_psd(l, n, k).unwrap();
            assert!(r.min_eigenvalue >= -1e-10 * r.leading_minors[0].abs().max(1.0), "{r:?}");
        }
    }
}

#[test]
fn pointwise_inequality_on_grid() {
    let spec = GridSpec::new(8).unwrap();
    let flat = compute_curvature(&metric_family(&MetricFamily::Flat, &spec).unwrap()).unwrap();
    assert!(pointwise_kato_check(&flat, 1.0, None).unwrap().passed());
    let b = compute_curvature(&metric_family(&MetricFamily::perturbed(0.05), &spec).unwrap()).unwrap();
    for k in [0.0, 0.5, 1.0, 1.5] {
        let r = pointwise_kato_check(&b, k, None).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.plus.nodes_total, b.len());
        if k == 0.0 {
            assert_eq!(r.plus.nodes_checked, b.len());
        }
    }
    assert!(pointwise_kato_check(&b, 1.7, None).is_err());
}

#[test]
fn rigidity_determinant_values() {
    for a in [0.05, 0.1, 0.2, 1.0 / 3.0] {
        let d = rigidity_determinant(a).unwrap();
        let c = rigidity_determinant_closed_form(a);
        assert!((d - c).abs() < 1e-12 * c.abs(), "{d} {c}");
        assert!(d > 0.0);
    }
    assert!((rigidity_determinant(1.0 / 3.0).unwrap() - 1536.0).abs() < 1e-9);
    // The printed value 288α(2-3α) is the bracket determinant times 8/(5-9α)
    // with the remaining (8/(5-9α))² dropped: both share the roots α = 0, 2/3.
    assert_eq!(rigidity_determinant_displayed(1.0 / 3.0), 96.0);
}
