use nalgebra::SymmetricEigen;
use weylkit::algebra::*;

fn brute_contraction(w: &AlgebraicTensor4) -> Mat4 {
    Mat4::from_fn(|t, l| {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    s += w.get4(i, j, k, t) * w.get4(i, j, k, l);
                }
            }
        }
        s
    })
}

#[test]
fn hundred_random_weyl_tensors() {
    let lf = LambdaFrame::standard();
    for seed in 0..100 {
        let w = random_algebraic_weyl(seed);
        let n2 = w.norm_sq();
        let (p, m) = project_self_dual(&w, &lf).unwrap();
        assert!((p.norm_sq() + m.norm_sq() - n2).abs() <= 1e-10 * n2);
        for part in [&w, &p, &m] {
            let c = contract_ww(part).unwrap();
            let quarter = 0.25 * part.norm_sq();
            assert!((c.tensor - Mat4::identity() * quarter).amax() <= 1e-10 * quarter.max(1e-300));
            assert!((c.tensor - brute_contraction(part)).amax() <= 1e-12 * n2);
        }
        for (part, chir) in [(&p, Chirality::Plus), (&m, Chirality::Minus)] {
            let s = weyl_spectrum(part, &lf).unwrap();
            let scale = s.norm_sq().sqrt();
            assert!(s.sum().abs() <= 1e-10 * scale);
            assert!((4.0 * s.norm_sq() - part.norm_sq()).abs() <= 1e-10 * part.norm_sq());
            let m3 = restrict_to_chirality(&part.to_pair_matrix().unwrap(), &lf, chir);
            let oracle = SymmetricEigen::new(m3).eigenvalues;
            let mut o: Vec<f64> = oracle.iter().copied().collect();
            o.sort_by(f64::total_cmp);
            for (a, b) in [s.lambda, s.mu, s.nu].iter().zip(&o) {
                assert!((a - b).abs() <= 1e-10 * scale);
            }
            let cubic = cubic_contraction(&part.to_pair_matrix().unwrap());
            assert!(cubic.abs() <= CUBIC_BOUND * part.norm_sq().powf(1.5) * (1.0 + 1e-10));
        }
    }
}

#[test]
fn cubic_bound_equality_for_repeated_eigenvalues() {
    let lf = LambdaFrame::standard();
    for chir in [Chirality::Plus, Chirality::Minus] {
        for t in [0.3, 1.0, 2.5] {
            for (eig, sign) in [([-t, -t, 2.0 * t], 1.0), ([t, t, -2.0 * t], -1.0)] {
                let w = weyl_from_eigenvalues(&lf, chir, eig);
                let bound = CUBIC_BOUND * w.norm_sq().powf(1.5);
                let c = cubic_contraction(&w.to_pair_matrix().unwrap());
                assert!((c - sign * bound).abs() <= 1e-8 * bound, "{chir:?} {eig:?}");
            }
        }
    }
}
