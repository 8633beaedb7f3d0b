use proptest::prelude::*;
use zetagap::functionals::{compute_h, compute_u, FunctionalParams};
use zetagap::kernels::{beta_integer, Polynomial};
use zetagap::quadrature::{adaptive, GaussLegendre};

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_kernel_matches_quadrature(c in coeffs(11), u in 0usize..6, x in 0.01f64..1.0) {
        let p = Polynomial::new(c);
        let k = p.convolution_kernel(u).unwrap();
        let q = adaptive(|t| t.powi(u as i32) * p.eval(x - t), 0.0, x, 1e-300, 1e-14).value;
        let scale = adaptive(|t| (t.powi(u as i32) * p.eval(x - t)).abs(), 0.0, x, 1e-300, 1e-14).value;
        prop_assert!((k.eval(x) - q).abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn beta_moment_matches_quadrature(c in coeffs(9), a in 1usize..12) {
        let p = Polynomial::new(c);
        let rule = GaussLegendre::<f64>::new(32);
        let q = rule.integrate(|x| (1.0 - x).powi(a as i32 - 1) * p.eval(x), 0.0, 1.0);
        let scale = rule.integrate(|x| ((1.0 - x).powi(a as i32 - 1) * p.eval(x)).abs(), 0.0, 1.0);
        prop_assert!((p.beta_moment(a).unwrap() - q).abs() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn multiply_is_pointwise(a in coeffs(6), b in coeffs(6), x in -1.0f64..1.0) {
        let (p, q) = (Polynomial::new(a), Polynomial::new(b));
        let pq = p.multiply(&q).eval(x);
        prop_assert!((pq - p.eval(x) * q.eval(x)).abs() <= 1e-12 * (1.0 + pq.abs()));
    }

    #[test]
    fn h_is_scale_invariant(a in coeffs(4), b in coeffs(4), s in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
        let (p1, p2) = (Polynomial::new(a), Polynomial::new(b));
        let params = FunctionalParams::default().with_c(4.0);
        if let Ok(h) = compute_h(&p1, &p2, &params) {
            let hs = compute_h(&p1.scale(s), &p2.scale(s), &params).unwrap();
            prop_assert!((h.h - hs.h).abs() <= 1e-12 * h.h.abs().max(1e-12));
        }
    }

    #[test]
    fn u_is_positive(a in coeffs(5), b in coeffs(5), r in 1usize..4) {
        let params = FunctionalParams::default().with_r(r);
        let u = compute_u(&Polynomial::new(a.clone()), &Polynomial::new(b.clone()), &params).unwrap();
        let zero = a.iter().chain(&b).all(|&x| x == 0.0);
        prop_assert!(u > 0.0 || zero);
    }
}

#[test]
fn beta_integer_small_values() {
    assert_eq!(beta_integer(0, 0), 1.0);
    assert!((beta_integer(1, 1) - 1.0 / 6.0).abs() < 1e-16);
    assert!((beta_integer(2, 3) - 2.0 * 6.0 / 720.0).abs() < 1e-16);
}

#[test]
fn h_of_zero_window_is_zero() {
    let p1 = Polynomial::new(vec![1.0, -0.5, 0.25]);
    let p2 = Polynomial::new(vec![0.3, 1.0]);
    for r in 1..=3 {
        let h = compute_h(&p1, &p2, &FunctionalParams::default().with_r(r)).unwrap();
        assert_eq!(h.h, 0.0);
        assert!(h.u > 0.0);
    }
}
