use proptest::prelude::*;
use vessel::evolution::{build_generators, evolve_b};
use vessel::hierarchy::{dp_add, dp_dx, dp_eval, dp_mul, DiffPoly, GaussRat};
use vessel::linalg::{self, c, fro, CMat, C64};
use vessel::{lyapunov_residual, random_realization, solve_lyapunov, Preset};

fn gauss() -> impl Strategy<Value = GaussRat> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4)
        .prop_map(|(a, b, c, d)| GaussRat::new(GaussRat::ratio(a, b), GaussRat::ratio(c, d)))
}

fn poly() -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((gauss(), prop::collection::vec(0u32..4, 0..3)), 0..4).prop_map(|terms| {
        terms
            .into_iter()
            .fold(DiffPoly::zero(), |acc, (g, m)| dp_add(&acc, &DiffPoly::term(g, m)))
    })
}

fn cmat(n: usize, m: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * m)
        .prop_map(move |v| CMat::from_fn(n, m, |i, j| c(v[i * m + j].0, v[i * m + j].1)))
}

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn diffpoly_ring_laws(a in poly(), b in poly(), d in poly()) {
        prop_assert_eq!(dp_add(&a, &b), dp_add(&b, &a));
        prop_assert_eq!(dp_mul(&a, &b), dp_mul(&b, &a));
        prop_assert_eq!(dp_mul(&dp_mul(&a, &b), &d), dp_mul(&a, &dp_mul(&b, &d)));
        prop_assert_eq!(dp_mul(&a, &dp_add(&b, &d)), dp_add(&dp_mul(&a, &b), &dp_mul(&a, &d)));
        prop_assert_eq!(dp_mul(&a, &DiffPoly::constant(GaussRat::one())), a.clone());
        prop_assert!(dp_mul(&a, &DiffPoly::zero()).is_zero());
    }

    #[test]
    fn derivation_is_linear_and_leibniz(a in poly(), b in poly()) {
        prop_assert_eq!(dp_dx(&dp_add(&a, &b)), dp_add(&dp_dx(&a), &dp_dx(&b)));
        prop_assert_eq!(dp_dx(&dp_mul(&a, &b)), dp_add(&dp_mul(&dp_dx(&a), &b), &dp_mul(&a, &dp_dx(&b))));
        prop_assert!(dp_dx(&DiffPoly::constant(GaussRat::one())).is_zero());
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), w in 0.2f64..1.5) {
        // β = e^{iwx} sampled on a grid; exact derivatives are (iw)^d β
        let h = 0.01;
        let samples: Vec<C64> = (0..41).map(|k| (c(0.0, w) * (k as f64 - 20.0) * h).exp()).collect();
        let ev = |p: &DiffPoly| dp_eval(p, &samples, h, 20).unwrap();
        let prod = ev(&dp_mul(&a, &b));
        let scale = 1.0 + (ev(&a) * ev(&b)).norm();
        prop_assert!((prod - ev(&a) * ev(&b)).norm() <= 1e-6 * scale);
    }

    #[test]
    fn lyapunov_solution_residual(n in 1usize..6, kind in preset(), b in cmat(5, 2), shift in prop::collection::vec(-0.5f64..0.5, 5)) {
        let p = kind.params();
        let a = CMat::from_fn(n, n, |i, j| if i == j { c(-1.0 - i as f64 * 0.7, shift[i]) } else if j == i + 1 { c(0.3, 0.1) } else { c(0.0, 0.0) });
        let b = b.rows(0, n).into_owned();
        let sol = solve_lyapunov(&a, &b, &p.sigma1, None).unwrap();
        let r = lyapunov_residual(&a, &sol.x, &b, &p.sigma1);
        prop_assert!(r.relative <= 1e-11, "relative residual {}", r.relative);
        prop_assert!(fro(&(&sol.x - sol.x.adjoint())) <= 1e-13 * (1.0 + fro(&sol.x)));
    }

    #[test]
    fn generators_commute(n in 1usize..8, seed in 0u64..1000, kind in preset(), order in 1usize..4) {
        let p = kind.params();
        let r = random_realization(n, &p, seed).unwrap();
        let g = build_generators(&p, &r.a, order).unwrap();
        prop_assert!(g.commutator_defect() <= 1e-12);
    }

    #[test]
    fn b_flow_is_a_group(seed in 0u64..500, kind in preset(), x1 in -1.0f64..1.0, t1 in -0.5f64..0.5, x2 in -1.0f64..1.0, t2 in -0.5f64..0.5) {
        let p = kind.params();
        let r = random_realization(3, &p, seed).unwrap();
        let g = build_generators(&p, &r.a, 1).unwrap();
        let two = evolve_b(&g, &evolve_b(&g, &r.b0, x1, t1).unwrap(), x2, t2).unwrap();
        let one = evolve_b(&g, &r.b0, x1 + x2, t1 + t2).unwrap();
        prop_assert!(fro(&(&two - &one)) <= 1e-12 * fro(&one));
    }

    #[test]
    fn expm_inverse_pair(a in cmat(4, 4), s in 0.1f64..3.0) {
        let a = a * c(s, 0.0);
        let prod = linalg::expm(&a).unwrap() * linalg::expm(&(-&a)).unwrap();
        prop_assert!(fro(&(prod - linalg::eye(4))) <= 1e-12 * (1.0 + (2.0 * s * 4.0f64).exp()));
    }
}
