use aotree::analysis::{gamma_bound, gamma_independent, gamma_sum, BoundInputs};
use num_bigint::BigUint;
use proptest::prelude::*;

proptest! {
    #[test]
    fn gamma_shrinks_as_lambda_grows(q in 2usize..25, c in 2usize..5, k in 2usize..5, a in 0.001f64..0.9, b in 0.001f64..0.9) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let g_lo = gamma_independent(&BoundInputs::new(q, c, k, lo)).unwrap();
        let g_hi = gamma_independent(&BoundInputs::new(q, c, k, hi)).unwrap();
        prop_assert!(g_hi <= g_lo);
    }

    #[test]
    fn gamma_grows_with_kappa(q in 1usize..20, c in 2usize..5, kappa in -1i64..19) {
        prop_assert!(gamma_sum(q, c, kappa) <= gamma_sum(q, c, kappa + 1));
    }

    #[test]
    fn dependent_bound_tracks_solution(q in 2usize..15, s in 0usize..6, h in 0.5f64..1.0, lambda in 0.01f64..0.5) {
        let inputs = BoundInputs::new(q, 2, 2, lambda).with_solution(s, h);
        let kappa = inputs.kappa_dependent().unwrap();
        let expected = ((s as f64 - 1.0 + (1.0 - h) / lambda) + 1e-9).floor() as i64;
        prop_assert_eq!(kappa, expected.min(q as i64));
        prop_assert_eq!(gamma_bound(&inputs).unwrap(), gamma_sum(q, 2, kappa));
    }
}

#[test]
fn known_values() {
    assert_eq!(gamma_independent(&BoundInputs::new(10, 2, 2, 0.1)).unwrap(), BigUint::from(57020u32));
    assert_eq!(gamma_independent(&BoundInputs::new(10, 2, 2, 0.6)).unwrap(), BigUint::from(0u32));
    assert!(BoundInputs::new(10, 2, 2, 1.5).validate().is_err());
}
