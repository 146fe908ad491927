use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use eislab::testfn::{
    bump_family, family_size, mellin_decay_bound, psi0, psi_mellin, psi_norms, BumpFunction,
    MellinEvaluator, C0_LOWER, DERIVATIVE_CONSTANTS, DERIV_RELATION_CONSTANT,
};
use eislab::Error;

/// (1/2π)∫_{−V}^{V} |ψ̃(σ+it)|² dt by the trapezoid rule, which is exact up
/// to truncation here because ψ̃(σ+i·) is the Fourier transform of a
/// compactly supported function of log y.
fn mellin_l2(psi: &BumpFunction, sigma: f64, v: f64) -> f64 {
    let ev = MellinEvaluator::new(psi, v).unwrap();
    let (x1, x2) = psi.log_support();
    let h = PI / (x2 - x1);
    let k = (v / h).floor() as i64;
    let sum: f64 = (-k..=k)
        .map(|j| {
            ev.eval(Complex64::new(sigma, j as f64 * h))
                .unwrap()
                .norm_sqr()
        })
        .sum();
    sum * h / (2.0 * PI)
}

/// (1/2πi)∫_{(1)} ψ̃(−u) y^u du truncated at |Im u| ≤ v.
fn mellin_inverse(ev: &MellinEvaluator, y: f64, v: f64, h: f64) -> f64 {
    let k = (v / h).floor() as i64;
    let sum: Complex64 = (-k..=k)
        .map(|j| {
            let u = Complex64::new(1.0, j as f64 * h);
            ev.eval(-u).unwrap() * (u * y.ln()).exp()
        })
        .sum();
    sum.re * h / (2.0 * PI)
}

#[test]
fn family_examples() {
    let t: f64 = 1e4;
    let b = bump_family(t, 0.019, 1).unwrap();
    assert!((b.center - (1.0 + t.powf(-0.019))).abs() < 1e-15);
    assert!((b.width - t.powf(-0.019)).abs() < 1e-15);
    assert!((b.eval(b.center) - (-1f64).exp()).abs() < 1e-15);
    assert_eq!(family_size(1000.0, 0.019), 2);
    assert!(matches!(
        bump_family(1000.0, 0.019, 3),
        Err(Error::Range(_))
    ));
    assert!(bump_family(1000.0, 1.0 / 51.0, 1).is_err());
    // supports of ψ_j and ψ_{j+2} are disjoint
    let t = 1e17; // ⌈T^0.019⌉ = 3
    let (_, hi1) = bump_family(t, 0.019, 1).unwrap().support();
    let (lo3, _) = bump_family(t, 0.019, 3).unwrap().support();
    assert!(hi1 < lo3);
}

#[test]
fn norm_relations_across_widths() {
    let r = |w: f64| {
        psi_norms(&BumpFunction::new(2.0, w).unwrap())
            .unwrap()
            .l1_sq
            / w
    };
    assert!((r(0.1) / r(0.01) - 1.0).abs() < 0.02);
    for w in [0.5, 0.2, 0.05, 0.01] {
        let b = BumpFunction::new(2.0, w).unwrap();
        let n = psi_norms(&b).unwrap();
        assert!(n.l1_sq * b.a >= C0_LOWER);
        assert!(n.deriv_l2 / (b.a * b.a) <= DERIV_RELATION_CONSTANT * n.l1_sq);
        assert!((n.l2 * n.l2 - n.l1_sq).abs() < 1e-15);
    }
}

#[test]
fn parseval_for_the_mellin_transform() {
    let b = BumpFunction::new(2.0, 0.5).unwrap();
    let want = psi_norms(&b).unwrap().l1_sq;
    let got = mellin_l2(&b, 0.0, 200.0 * b.a);
    assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
}

/// Inversion on Re u = 1. The contour is cut at 1000A: ψ̃ decays only like
/// exp(−c√|v|), so a cut at 300A leaves ~10⁻⁵ and the 10⁻⁶ level needs ~500A.
#[test]
fn mellin_inversion_round_trip() {
    let b = BumpFunction::new(2.0, 0.5).unwrap();
    let v_short = 300.0 * b.a;
    let v_long = 1000.0 * b.a;
    let ev = MellinEvaluator::new(&b, v_long).unwrap();
    let mut short: f64 = 0.0;
    let mut long: f64 = 0.0;
    for k in 0..10 {
        let y = 1.8 + 0.4 * k as f64 / 9.0;
        short = short.max((mellin_inverse(&ev, y, v_short, 0.5) - b.eval(y)).abs());
        long = long.max((mellin_inverse(&ev, y, v_long, 0.5) - b.eval(y)).abs());
    }
    assert!(long <= 1e-6, "{long}");
    assert!(short > long);
}

/// Cubic decay of ψ̃ along vertical lines. The constant is measured for the
/// width-0.5 bump (its maximum over σ ∈ [−2, 2.5] is ≈ 1176, at σ = 2.5).
#[test]
fn mellin_decay_on_sampled_lines() {
    let b = BumpFunction::new(2.0, 0.5).unwrap();
    let ev = MellinEvaluator::new(&b, 100.0 * b.a).unwrap();
    for sigma in [-2.0, 0.0, 1.0, 2.5] {
        for k in 0..=200 {
            let s = Complex64::new(sigma, 100.0 * b.a * k as f64 / 200.0);
            let v = ev.eval(s).unwrap().norm();
            assert!(v <= mellin_decay_bound(&b, s) * (1.0 + 1e-9), "s={s}");
            assert!(v * (1.0 + s.im / b.a).powi(3) <= 1200.0, "s={s}");
        }
    }
    assert!(psi_mellin(&b, Complex64::new(3.0, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bump_is_nonnegative_and_compactly_supported(c in 1.2f64..3.0, w in 0.01f64..0.4, y in 0.5f64..4.0) {
        let b = BumpFunction::new(c, w).unwrap();
        let v = b.eval(y);
        prop_assert!(v >= 0.0);
        let (lo, hi) = b.support();
        if y <= lo || y >= hi {
            prop_assert_eq!(v, 0.0);
        } else {
            prop_assert!(v > 0.0 || (y - lo).min(hi - y) < 0.02 * w);
        }
    }

    #[test]
    fn derivatives_obey_frozen_constants(c in 1.2f64..3.0, w in 0.01f64..0.4, x in -0.5f64..0.5) {
        let b = BumpFunction::new(c, w).unwrap();
        let y = c + x * w;
        for j in 1..=3 {
            let bound = DERIVATIVE_CONSTANTS[j - 1] * b.a.powi(j as i32) * (1.0 + 1e-9);
            prop_assert!(b.derivative(y, j).abs() <= bound);
        }
    }

    #[test]
    fn boundary_is_flat(x in 0.4995f64..0.5) {
        let h = 1e-4;
        let d = (psi0(x + h) - psi0(x - h)).abs();
        prop_assert!(d <= 1e-8);
    }
}
