mod common;

use lbcalc_core::lie::{bch, compatible_norm, mat_exp, mat_log, CompatibleNorm, BCH_DOMAIN_RADIUS, BCH_OUTPUT_BOUND};
use lbcalc_core::Matrix;
use proptest::prelude::*;

use common::{matrix, with_norm};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bracket_is_submultiplicative_2x2(x in matrix(2), y in matrix(2)) {
        prop_assert!(CompatibleNorm::default().bracket_bound_holds(&x, &y, 4.0));
    }

    #[test]
    fn bracket_is_submultiplicative_3x3(x in matrix(3), y in matrix(3)) {
        prop_assert!(CompatibleNorm::default().bracket_bound_holds(&x, &y, 4.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn exp_log_round_trip(a in matrix(3), size in 0.0f64..=0.4) {
        let a = if a.norm1() == 0.0 { a } else { a.scale(size / a.norm1()) };
        let g = &Matrix::identity(3) + &a;
        let back = mat_exp(&mat_log(&g).unwrap());
        prop_assert!((&back - &g).max_abs() <= 1e-10);
    }

    #[test]
    fn exp_turns_bch_into_products(x in matrix(3), y in matrix(3), total in 0.0f64..=0.2, split in 0.0f64..=1.0) {
        let x = with_norm(&x, total * split);
        let y = with_norm(&y, total * (1.0 - split));
        let lhs = mat_exp(&bch(&x, &y, 10).unwrap());
        let rhs = &mat_exp(&x) * &mat_exp(&y);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-8);
    }

    #[test]
    fn truncation_error_shrinks_with_order(
        x in matrix(3),
        y in matrix(3),
        total in 0.2f64..=0.4,
        split in 0.2f64..=0.8,
        order in 3usize..=5,
    ) {
        let x = with_norm(&x, total * split);
        let y = with_norm(&y, total * (1.0 - split));
        let err = |x: &Matrix, y: &Matrix| {
            let reference = mat_log(&(&mat_exp(x) * &mat_exp(y))).unwrap();
            (&bch(x, y, order).unwrap() - &reference).norm1()
        };
        let full = err(&x, &y);
        let half = err(&x.scale(0.5), &y.scale(0.5));
        prop_assume!(full > 1e-12);
        prop_assert!(full / half >= 2f64.powi(order as i32) * 0.5, "ratio {}", full / half);
    }
}

#[test]
fn domain_constants_are_exact() {
    assert_eq!(BCH_DOMAIN_RADIUS, 1.5f64.ln());
    assert_eq!(BCH_OUTPUT_BOUND, 2f64.ln());
}

#[test]
fn compatible_norm_is_twice_column_sum() {
    let m = Matrix::from_real_rows(&[&[1.0, -2.0], &[0.5, 0.25]]).unwrap();
    assert_eq!(compatible_norm(&m), 2.0 * 2.25);
}
