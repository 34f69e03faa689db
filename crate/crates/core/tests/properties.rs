use besselsum::bessel::{bessel_j, bessel_y, EvalPoint, Order};
use besselsum::entropy::{greens_combination, p_closed, GreenParams};
use besselsum::resolvent::{compute_b, compute_b_fresh, CoeffIndex};
use besselsum::series::{p_direct, SeriesTruncation};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn summed_and_closed_p_agree(x in 0.05f64..60.0) {
        let pt = EvalPoint::new(x).unwrap();
        let direct = p_direct(pt, &SeriesTruncation::default()).unwrap().value;
        let closed = p_closed(pt).unwrap().value;
        prop_assert!((direct - closed).abs() <= 1e-8, "x={} direct={} closed={}", x, direct, closed);
    }

    #[test]
    fn wronskian(x in 0.1f64..50.0, n in 0u32..12) {
        let pt = EvalPoint::new(x).unwrap();
        let w = bessel_j(Order::integer(n), pt).unwrap() * bessel_y(n + 1, pt).unwrap()
            - bessel_j(Order::integer(n + 1), pt).unwrap() * bessel_y(n, pt).unwrap();
        let target = 2.0 / (PI * x);
        prop_assert!((w + target).abs() <= 1e-12 * target);
    }

    #[test]
    fn greens_depends_on_product_only(a in 0.01f64..8.0, s in 0.1f64..10.0) {
        let c1 = greens_combination(GreenParams::new(1.0, a).unwrap()).unwrap();
        let c2 = greens_combination(GreenParams::new(s, a / s).unwrap()).unwrap();
        prop_assert!((c1 - c2).abs() <= 1e-14 * c1.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn resolvent_reality_and_memo(i in 0i32..4, j in 0i32..4, l in 0i32..9) {
        let b = compute_b(CoeffIndex::new(i, j, l));
        prop_assert_eq!(b.conjugate(), (*compute_b(CoeffIndex::new(j, i, l))).clone());
        prop_assert_eq!((*b).clone(), compute_b_fresh(CoeffIndex::new(i, j, l)));
    }
}
