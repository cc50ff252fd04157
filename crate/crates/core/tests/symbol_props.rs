use dampwave::symbols::{beta_delta, heat_cosh_sinhc, propagator_kernel, semigroup_entries};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn kernel_bounded_by_time(r in 1e-3f64..50.0, delta in 0.0f64..2.0, t in 1e-3f64..100.0) {
        let k = propagator_kernel(r, delta, t);
        prop_assert!(k.is_finite());
        prop_assert!(k.abs() <= t * (1.0 + 1e-12), "K = {k}, t = {t}");
    }

    #[test]
    fn kernel_is_odd_in_time_at_zero(r in 1e-3f64..50.0, delta in 0.0f64..2.0) {
        prop_assert_eq!(propagator_kernel(r, delta, 0.0), 0.0);
    }

    #[test]
    fn composition(r in 1e-2f64..10.0, delta in 1e-3f64..1.0, t in 1e-2f64..10.0, s in 1e-2f64..10.0) {
        let lhs = semigroup_entries(r, delta, t).compose(&semigroup_entries(r, delta, s));
        let rhs = semigroup_entries(r, delta, t + s);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * rhs.max_abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn entries_never_overflow(r in 1e-2f64..1e3, delta in 1e-3f64..10.0, t in 1e-3f64..1e3) {
        prop_assert!(semigroup_entries(r, delta, t).is_finite());
    }

    // where cancellation is mild the determinant identity holds tightly
    #[test]
    fn determinant_where_attainable(r in 1e-2f64..3.0, delta in 1e-3f64..0.3, t in 1e-2f64..2.0) {
        // β is real (growth e^{tβ} in the entries) only in the overdamped range δr ≥ 1
        let growth = if delta * r >= 1.0 { beta_delta(r, delta).unwrap() } else { 0.0 };
        prop_assume!(t * growth < 2.0);
        let target = (-2.0 * delta * t * r * r).exp();
        let det = semigroup_entries(r, delta, t).det();
        prop_assert!((det - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn heat_products_match_naive(r in 0.0f64..3.0, delta in 0.0f64..0.5, t in 0.0f64..3.0) {
        let (ch, sh) = heat_cosh_sinhc(r, delta, t);
        let w = delta * delta * r.powi(4) - r * r;
        let heat = (-delta * t * r * r).exp();
        let (c, s) = if w > 0.0 {
            let b = w.sqrt();
            ((t * b).cosh(), if b > 0.0 { (t * b).sinh() / b } else { t })
        } else if w < 0.0 {
            let b = (-w).sqrt();
            ((t * b).cos(), (t * b).sin() / b)
        } else {
            (1.0, t)
        };
        prop_assert!((ch - heat * c).abs() <= 1e-9 * (1.0 + (heat * c).abs()));
        prop_assert!((sh - heat * s).abs() <= 1e-9 * (1.0 + (heat * s).abs()));
    }
}
