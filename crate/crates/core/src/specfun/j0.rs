use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::KahanSum;

const SERIES_LIMIT: f64 = 8.0;
const INTEGRAL_LIMIT: f64 = 25.0;

/// Bessel function J₀ on |α| ≤ 100.
///
/// Power series for |α| ≤ 8, Bessel's integral by the periodic trapezoid
/// rule on 8 < |α| ≤ 25, Hankel's asymptotic expansion beyond.
pub fn bessel_j0(alpha: f64) -> Result<f64> {
    let x = alpha.abs();
    if !(x <= 100.0) {
        return Err(Error::domain(format!(
            "bessel_j0 requires |alpha| <= 100, got {alpha}"
        )));
    }
    Ok(if x <= SERIES_LIMIT {
        j0_series(x)
    } else if x <= INTEGRAL_LIMIT {
        j0_bessel_integral(x)
    } else {
        j0_hankel(x)
    })
}

/// Σ (-1)^k (x/2)^{2k} / (k!)², summed until terms drop below 1e-18.
pub fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut acc = KahanSum::new();
    acc.add(term);
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        acc.add(term);
        if term.abs() < 1e-18 {
            break;
        }
    }
    acc.value()
}

/// J₀(x) = (1/2π) ∫₀^{2π} cos(x sin θ) dθ. The trapezoid rule with N nodes
/// is exact up to 2 J_N(x), which is negligible once N exceeds x by ~40.
pub fn j0_bessel_integral(x: f64) -> f64 {
    let n = x.ceil() as usize + 48;
    let h = 2.0 * PI / n as f64;
    let acc: KahanSum = (0..n).map(|k| (x * (h * k as f64).sin()).cos()).collect();
    acc.value() / n as f64
}

fn j0_hankel(x: f64) -> f64 {
    // a_k = (-1)^k [1·3·…·(2k-1)]² / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut xpow: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let term = a / xpow;
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
        let odd = (2 * k + 1) as f64;
        a *= -(odd * odd) / ((k + 1) as f64 * 8.0);
        xpow *= x;
    }
    // With a_k carrying its own sign: P = Σ(-1)^k a_{2k}/x^{2k}, Q = Σ(-1)^k a_{2k+1}/x^{2k+1}.
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn value_at_four_is_negative() {
        let v = bessel_j0(4.0).unwrap();
        assert!((v + 0.397_149_809_863_847_4).abs() < 1e-13, "{v}");
        assert!(v < -0.397 && v > -0.398);
    }

    #[test]
    fn first_zero_by_bisection_on_series() {
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if j0_series(lo) * j0_series(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((lo - 2.404_825_557_695_773).abs() < 1e-14);
        assert!(bessel_j0(2.404_825_557_695_773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn branches_agree_at_seams() {
        for x in [7.0, 7.9, 8.0, 8.1] {
            assert!((j0_series(x) - j0_bessel_integral(x)).abs() < 1e-13, "{x}");
        }
        for x in [25.0, 30.0, 60.0, 100.0] {
            assert!((j0_bessel_integral(x) - j0_hankel(x)).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn even_and_domain() {
        assert_eq!(bessel_j0(-3.3).unwrap(), bessel_j0(3.3).unwrap());
        assert!(bessel_j0(100.5).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
    }
}
