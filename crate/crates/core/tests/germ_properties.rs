use lbcalc_core::germ::{
    compose, compose_derivative, invert, norm_comparison_stats, residual, t_operator_excess, AnchorSet, Germ,
};
use lbcalc_core::{sample, Error};
use proptest::prelude::*;

fn random_germ(seed: u64, dim: usize, anchors: usize, index: u64, degree: usize, d_norm: f64) -> Germ {
    let mut rng = sample::rng(seed);
    let set = sample::anchors(&mut rng, dim, anchors, 3.0);
    sample::germ_with_d_norm(&mut rng, &set, index, degree, d_norm).unwrap()
}

fn relative_gap(a: &Germ, b: &Germ) -> f64 {
    let diff = a.add_scaled(b, -1.0).unwrap().max_abs_coeff();
    diff / a.max_abs_coeff().max(b.max_abs_coeff()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_satisfies_sup_bound(seed in any::<u64>(), dim in 1usize..=3, n in 1u64..=4, d in 0.0f64..=0.5) {
        let g = random_germ(seed, dim, 1 + (seed % 2) as usize, n, 6, d);
        let inv = invert(&g).unwrap();
        prop_assert_eq!(inv.index(), 12 * n);
        prop_assert!(inv.sup_norm() <= 1.0 / (6.0 * n as f64));
        let h = residual(&g, &inv).unwrap();
        prop_assert!(h.max_abs_coeff() <= 1e-10);
    }

    #[test]
    fn every_germ_satisfies_norm_comparison(seed in any::<u64>(), dim in 1usize..=3, n in 1u64..=20, d in 0.0f64..5.0) {
        let g = random_germ(seed, dim, 1, n, 8, d);
        prop_assert!(g.norm_comparison_holds());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_is_a_two_sided_identity(seed in any::<u64>(), dim in 1usize..=2, n in 1u64..=3) {
        let l = 3 * (n + 2);
        let outer = random_germ(seed, dim, 1, n, 6, 0.3);
        let zero_l = Germ::zero(outer.anchors().clone(), l, 6).unwrap();
        prop_assert_eq!(compose(&outer, &zero_l).unwrap(), outer.restrict(l).unwrap());
        let inner = random_germ(seed, dim, 1, l, 6, 0.3);
        let zero_n = Germ::zero(inner.anchors().clone(), n, 6).unwrap();
        prop_assert_eq!(compose(&zero_n, &inner).unwrap(), inner.clone());
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>(), dim in 1usize..=2) {
        let g1 = random_germ(seed, dim, 1, 1, 6, 0.4);
        let g2 = random_germ(seed.wrapping_add(1), dim, 1, 12, 6, 0.4);
        let g3 = random_germ(seed.wrapping_add(2), dim, 1, 12 * 14, 6, 0.4);
        let left = compose(&compose(&g1, &g2).unwrap(), &g3).unwrap();
        let right = compose(&g1, &compose(&g2, &g3).unwrap()).unwrap();
        prop_assert!(relative_gap(&left, &right) <= 1e-12);
    }

    #[test]
    fn linearised_residual_is_close_to_identity(seed in any::<u64>(), dim in 1usize..=3, n in 1u64..=3, d in 0.0f64..=0.5) {
        let g = random_germ(seed, dim, 1, n, 6, d);
        let inv = invert(&g).unwrap();
        let excess = t_operator_excess(&g, &inv).unwrap();
        prop_assert!(excess <= g.d_norm() * (1.0 + 1e-12));
        prop_assert!(excess <= 0.5 * (1.0 + 1e-12));
    }

    #[test]
    fn derivative_matches_central_differences(seed in any::<u64>(), dim in 1usize..=2, n in 1u64..=2) {
        let g1 = random_germ(seed, dim, 1, n, 6, 0.8);
        let g2 = random_germ(seed.wrapping_add(1), dim, 1, 12 * n, 6, 0.3);
        let h1 = random_germ(seed.wrapping_add(2), dim, 1, n, 6, 1.0);
        let h2 = random_germ(seed.wrapping_add(3), dim, 1, 12 * n, 6, 1.0);
        let step = 1e-5;
        let exact = compose_derivative(&g1, &g2, &h1, &h2).unwrap();
        let plus = compose(&g1.add_scaled(&h1, step).unwrap(), &g2.add_scaled(&h2, step).unwrap()).unwrap();
        let minus = compose(&g1.add_scaled(&h1, -step).unwrap(), &g2.add_scaled(&h2, -step).unwrap()).unwrap();
        let fd = plus.add_scaled(&minus, -1.0).unwrap().scale(0.5 / step);
        prop_assert!(relative_gap(&fd, &exact) <= 1e-7);
    }

    #[test]
    fn non_diffeomorphisms_are_refused(seed in any::<u64>(), dim in 1usize..=2, d in 1.0f64..4.0) {
        let g = random_germ(seed, dim, 1, 2, 6, d);
        let err = invert(&g).unwrap_err();
        prop_assert!(matches!(err, Error::Domain(ref m) if m.contains("local diffeomorphism")));
    }

    #[test]
    fn inversion_gate_at_one_half(seed in any::<u64>(), d in 0.5001f64..0.999) {
        let g = random_germ(seed, 2, 1, 1, 6, d);
        prop_assert!(matches!(invert(&g), Err(Error::Domain(_))));
    }
}

#[test]
fn hook_sees_no_violations() {
    let anchors = AnchorSet::origin(1);
    Germ::scalar(5, 8, &[0.0, 0.3, 0.0, 2.0]).unwrap();
    Germ::zero(anchors, 2, 4).unwrap();
    let stats = norm_comparison_stats();
    assert!(stats.checked >= 2);
    assert_eq!(stats.violations, 0);
}
