use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::ComplexKahanSum;

/// Distance below which an argument is treated as sitting on a pole.
pub const POLE_THRESHOLD: f64 = 1e-8;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// B_{2k} / (2k (2k-1)) for k = 1..=12, the Stirling series coefficients.
const STIRLING: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
    77683.0 / 5796.0,
    -236_364_091.0 / 1_506_960.0,
];

/// Log-gamma continued analytically from the positive real axis
/// (the branch that agrees with `lgamma` there and is continuous off the
/// negative real axis).
///
/// Small arguments are shifted upward by recursion until |s| ≥ 10 and
/// Re s ≥ 0, then the Stirling series is summed.
pub fn ln_gamma(s: Complex64) -> Result<Complex64> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain(format!(
            "ln_gamma at non-finite argument {s}"
        )));
    }
    if s.re <= POLE_THRESHOLD && s.im.abs() < POLE_THRESHOLD {
        let k = s.re.round();
        if (s.re - k).abs() < POLE_THRESHOLD {
            return Err(Error::Pole {
                function: "gamma",
                at: format!("{s}"),
            });
        }
    }
    let mut z = s;
    let mut shift = ComplexKahanSum::new();
    while z.re < 0.0 || z.norm() < 10.0 {
        shift.add(z.ln());
        z += 1.0;
    }
    Ok(stirling(z) - shift.value())
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        let term = p * c;
        series += term;
        if term.norm() < 1e-18 * series.norm() {
            break;
        }
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// Real log-gamma for positive arguments.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::domain(format!(
            "ln_gamma_real requires x > 0, got {x}"
        )));
    }
    Ok(ln_gamma(Complex64::new(x, 0.0))?.re)
}

/// Γ(s) for moderate arguments.
pub fn gamma(s: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(s)?.exp())
}

/// A logarithm of sin(w) that stays finite when |Im w| is large.
/// Agrees with some branch of log sin; callers only exponentiate sums of it.
pub(crate) fn ln_sin(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im > 1.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - (2.0 * i).ln()
    } else if w.im < -1.0 {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - (2.0 * i).ln()
    } else {
        w.sin().ln()
    }
}

/// ln π
pub(crate) const LN_PI: f64 = 1.144_729_885_849_400_174_143_427_351_353;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn integer_and_half_integer_values() {
        assert!(ln_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(ln_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        let half = ln_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-14);
        assert!(half.im.abs() < 1e-14);
        let ten = ln_gamma(c(11.0, 0.0)).unwrap();
        assert!((ten.re - 3_628_800f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn poles_are_rejected() {
        for k in [0.0, -1.0, -7.0] {
            assert!(matches!(ln_gamma(c(k, 0.0)), Err(Error::Pole { .. })));
            assert!(matches!(
                ln_gamma(c(k + 1e-9, 0.0)),
                Err(Error::Pole { .. })
            ));
        }
        assert!(ln_gamma(c(-7.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn recurrence_holds_off_axis() {
        for &(re, im) in &[(0.3, 2.0), (-4.7, 0.2), (3.0, -40.0), (0.5, 1000.0)] {
            let s = c(re, im);
            let lhs = ln_gamma(s + 1.0).unwrap();
            let rhs = ln_gamma(s).unwrap() + s.ln();
            let d = lhs - rhs;
            // Equal modulo 2πi; the analytic branch keeps them equal outright
            // away from the negative axis.
            assert!(d.re.abs() < 1e-12 * (1.0 + lhs.norm()), "{s}: {d}");
            let k = (d.im / (2.0 * PI)).round();
            assert!((d.im - 2.0 * PI * k).abs() < 1e-10, "{s}: {d}");
        }
    }

    #[test]
    fn reflection_modulus() {
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for t in [1.0, 10.0, 100.0] {
            let g = ln_gamma(c(0.5, t)).unwrap();
            let expect = 0.5 * (PI.ln() - (PI * t).cosh().ln());
            assert!((g.re - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn ln_sin_matches_direct() {
        for &(re, im) in &[(0.3, 0.2), (0.7, 5.0), (1.2, -8.0)] {
            let w = c(re, im);
            let a = ln_sin(w).exp();
            let b = w.sin();
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }
}
