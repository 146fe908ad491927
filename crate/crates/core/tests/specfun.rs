use num_complex::Complex64;
use proptest::prelude::*;

use eislab::golden::bundled_dir;
use eislab::par::Exec;
use eislab::selftest::run_suite;
use eislab::specfun::{eisenstein_constants, ln_gamma, monotone_asymptotic, scaled_bessel_k, zeta};
use eislab::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn golden_kernel_and_ode_suites_pass() {
    for suite in ["specfun", "ode"] {
        let r = run_suite(suite, &bundled_dir(), Exec::default());
        let failures: Vec<_> = r.failures().map(|c| c.name.clone()).collect();
        assert!(r.passed(), "{suite}: {:?} {failures:?}", r.error);
    }
}

#[test]
fn mellin_closed_forms_match_quadrature() {
    let r = run_suite("mellin", &bundled_dir(), Exec::default());
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
}

#[test]
fn scaling_keeps_large_parameters_finite() {
    for (t, y) in [
        (1e4, 1.0),
        (1e4, 5000.0),
        (1e4, 1e4),
        (1e4, 100_100.0),
        (3000.0, 30_100.0),
    ] {
        // phase rounding limits y ≪ T to ~ε·T·log(2T/y) absolute
        let v = scaled_bessel_k(t, y, 1e-11).unwrap();
        assert!(v.value.is_finite(), "T={t} y={y}");
        assert!(v.abs_error_bound <= 1e-10 * v.value.abs().max(1.0));
    }
}

#[test]
fn kernel_domain_is_enforced() {
    assert!(matches!(
        scaled_bessel_k(10.0, 0.0, 1e-12),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        scaled_bessel_k(-1.0, 1.0, 1e-12),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        scaled_bessel_k(10.0, 1.0, 1e-16),
        Err(Error::Domain(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ln_gamma_recurrence(re in 0.05f64..20.0, im in -300.0f64..300.0) {
        let s = c(re, im);
        let lhs = (ln_gamma(s + 1.0).unwrap() - ln_gamma(s).unwrap()).exp();
        prop_assert!((lhs - s).norm() <= 1e-11 * s.norm());
    }

    #[test]
    fn zeta_is_conjugate_symmetric(re in 0.2f64..3.0, im in 0.5f64..400.0) {
        let a = zeta(c(re, im)).unwrap();
        let b = zeta(c(re, -im)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn certified_bound_is_respected(t in 0.0f64..600.0, y in 0.05f64..700.0) {
        let v = scaled_bessel_k(t, y, 1e-12).unwrap();
        prop_assert!(v.value.is_finite());
        prop_assert!(v.abs_error_bound <= 1e-10 * v.value.abs().max(1.0));
    }

    /// Beyond the turning region the kernel follows the monotone branch,
    /// with relative correction O(T²/(y²−T²)^{3/2}).
    #[test]
    fn monotone_branch_agrees(t in 5.0f64..800.0, k in 8.0f64..40.0) {
        let y = t + k * t.cbrt();
        let v = scaled_bessel_k(t, y, 1e-13).unwrap().value;
        let w2 = (y - t) * (y + t);
        let expected_rel = 0.5 * (1.0 + t * t / w2) / w2.sqrt();
        let rel = (v / monotone_asymptotic(t, y) - 1.0).abs();
        prop_assert!(rel <= expected_rel, "T={t} y={y}: {rel} > {expected_rel}");
    }

    #[test]
    fn constants_are_normalised(t in 1.0f64..3000.0) {
        let k = eisenstein_constants(t).unwrap();
        prop_assert!((k.mu.norm() - 1.0).abs() <= 1e-12);
        prop_assert!(k.rho_star_1_scaled > 0.0);
    }
}
