//! Scaled modified Bessel function of imaginary order, e^{πT/2} K_{iT}(y).
//!
//! Starting from K_{iT}(y) = ½ ∫_ℝ exp(−y cosh t + iTt) dt, the real line is
//! deformed onto steepest-descent paths t = s + iθ(s) of the exponent. The
//! integrand is conjugate-symmetric under t ↦ −t̄, so only the half s ≥ 0 is
//! integrated and the real part kept.
//!
//! * y ≥ T: one saddle on the imaginary axis at iθ₀, sin θ₀ = T/y. Along
//!   sin θ = Ts/(y sinh s) the phase is constant and zero, so the scaled value
//!   is a positive integral with no cancellation.
//! * y < T: saddles at ±a + iπ/2 with cosh a = T/y. The path runs along
//!   Im t = π from s = 0 to s = c/T (c = Ta − y sinh a), then follows the
//!   level set sin θ = (Ts − c)/(y sinh s) down through the saddle and out to
//!   s → ∞. Along the level set the phase is the constant c.
//!
//! All square roots and differences near the saddle are evaluated in
//! cancellation-free form in the offset x = s − a.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{adaptive_gk_unchecked, QuadOptions, QuadResult};

/// Integrand values below e^{-CUTOFF} relative to the saddle are dropped.
const CUTOFF: f64 = 46.0;
/// Smallest absolute accuracy that may be requested.
pub const MIN_TARGET: f64 = 1e-14;

/// A certified value of e^{πT/2} K_{iT}(y).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScaledBesselValue {
    #[serde(rename = "T")]
    pub t: f64,
    pub y: f64,
    pub value: f64,
    pub abs_error_bound: f64,
}

/// Which contour family a (T, y) pair falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselRegime {
    Oscillatory,
    Transition,
    Monotone,
}

/// Width of the turning-point band |y − T| ≤ 5 T^{1/3}.
pub fn transition_halfwidth(t: f64) -> f64 {
    5.0 * t.cbrt()
}

pub fn regime(t: f64, y: f64) -> BesselRegime {
    if t > 0.0 && (y - t).abs() <= transition_halfwidth(t) {
        BesselRegime::Transition
    } else if y < t {
        BesselRegime::Oscillatory
    } else {
        BesselRegime::Monotone
    }
}

/// e^{πT/2} K_{iT}(y) with an absolute error bound not exceeding `target_abs_err`.
pub fn scaled_bessel_k(t: f64, y: f64, target_abs_err: f64) -> Result<ScaledBesselValue> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "scaled_bessel_k requires T >= 0, got {t}"
        )));
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::domain(format!(
            "scaled_bessel_k requires y > 0, got {y}"
        )));
    }
    if !(target_abs_err >= MIN_TARGET) {
        return Err(Error::domain(format!(
            "target accuracy {target_abs_err:e} below the supported floor {MIN_TARGET:e}"
        )));
    }
    let transition = regime(t, y) == BesselRegime::Transition;
    let (value, err) = if y >= t {
        monotone(t, y, target_abs_err, transition)
    } else {
        oscillatory(t, y, target_abs_err, transition)
    };
    if !(err <= target_abs_err) || !value.is_finite() {
        return Err(Error::accuracy(
            format!("scaled_bessel_k(T={t}, y={y})"),
            err,
            target_abs_err,
        ));
    }
    Ok(ScaledBesselValue {
        t,
        y,
        value,
        abs_error_bound: err,
    })
}

/// Leading saddle-point approximation on y > T:
/// √(π/2) (y² − T²)^{-1/4} exp(T arccos(T/y) − √(y² − T²)).
pub fn monotone_asymptotic(t: f64, y: f64) -> f64 {
    let w = ((y - t) * (y + t)).sqrt();
    (std::f64::consts::PI / 2.0).sqrt() / w.sqrt() * (t * (t / y).acos() - w).exp()
}

/// V_T(y) = √y K_{iT}(y), scaled by e^{πT/2}.
pub fn scaled_v(t: f64, y: f64, target_abs_err: f64) -> Result<f64> {
    let k = scaled_bessel_k(t, y, target_abs_err / y.sqrt().max(1.0))?;
    Ok(y.sqrt() * k.value)
}

fn options(target: f64, transition: bool, pieces: usize) -> QuadOptions {
    QuadOptions {
        abs_tol: target,
        rel_tol: 0.0,
        max_panels: 20_000,
        // ≥ 2000 Kronrod nodes in the turning-point band
        initial_panels: if transition {
            100usize.div_ceil(pieces)
        } else {
            1
        },
    }
}

/// sinh x − x without cancellation.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.25 {
        let x2 = x * x;
        x * x2 / 6.0
            * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0 * (1.0 + x2 / 110.0))))
    } else {
        x.sinh() - x
    }
}

/// cosh x − 1 without cancellation.
fn cosh_minus_one(x: f64) -> f64 {
    let h = (0.5 * x).sinh();
    2.0 * h * h
}

// ---------------------------------------------------------------- y ≥ T

/// Exponent of the integrand on the monotone path, relative to nothing
/// (absolute, scaled by e^{πT/2}).
fn monotone_exponent(t: f64, y: f64, s: f64) -> f64 {
    if t == 0.0 {
        return -y * s.cosh();
    }
    // r = sin θ = T s / (y sinh s); 1 − r in cancellation-free form.
    let (r, one_minus_r) = if s == 0.0 {
        (t / y, (y - t) / y)
    } else {
        let ysh = y * s.sinh();
        let omr = ((y - t) * s.sinh() + t * sinh_minus_x(s)) / ysh;
        (1.0 - omr, omr)
    };
    let cos_theta = (one_minus_r * (1.0 + r)).max(0.0).sqrt();
    let beta = cos_theta.atan2(r); // π/2 − θ
    t * beta - y * s.cosh() * cos_theta
}

const NORMALIZED_TARGET: f64 = 1e-14;

fn monotone(t: f64, y: f64, target: f64, transition: bool) -> (f64, f64) {
    let e0 = monotone_exponent(t, y, 0.0);
    // Find the truncation point where the integrand has fallen by e^{-CUTOFF}.
    let mut upper = 1e-3;
    while monotone_exponent(t, y, upper) - e0 > -CUTOFF {
        upper *= 2.0;
    }
    let scale = e0.exp();
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    let f = |s: f64| (monotone_exponent(t, y, s) - e0).exp();
    // The normalized integrand is positive with maximum 1, so capping its
    // target keeps the result relatively accurate when the value is tiny.
    let opts = options((target / scale).min(NORMALIZED_TARGET), transition, 1);
    let r: QuadResult<f64> = adaptive_gk_unchecked(&f, 0.0, upper, opts);
    // Truncated tail is below e^{-CUTOFF} times the path length scale.
    let tail = (-CUTOFF).exp() * upper;
    (scale * r.value, scale * (r.abs_err + tail))
}

// ---------------------------------------------------------------- y < T

struct SaddleGeometry {
    t: f64,
    y: f64,
    /// √(T² − y²) = y sinh a
    q: f64,
    /// saddle abscissa, cosh a = T/y
    a: f64,
    /// constant phase T a − y sinh a along the descent paths
    c: f64,
}

impl SaddleGeometry {
    fn new(t: f64, y: f64) -> Self {
        let q = ((t - y) * (t + y)).sqrt();
        let a = (q / y).asinh();
        let c = t * a - q;
        Self { t, y, q, a, c }
    }

    /// Returns (exponent, dθ/ds) at s on the branch selected by the sign of s − a.
    fn branch(&self, s: f64) -> (f64, f64) {
        let (t, y, q) = (self.t, self.y, self.q);
        let x = s - self.a;
        let sh = s.sinh();
        let ch = s.cosh();
        let ysh = y * sh;
        // 1 − r = [q (cosh x − 1) + T (sinh x − x)] / (y sinh s)
        let one_minus_r = ((q * cosh_minus_one(x) + t * sinh_minus_x(x)) / ysh).max(0.0);
        let r = 1.0 - one_minus_r;
        let cb = (one_minus_r * (1.0 + r)).sqrt(); // |cos θ|
        let beta = cb.atan2(r); // arccos r
                                // r' = [T − r y cosh s] / (y sinh s), with T − y cosh s expanded about a
        let num = -(t * cosh_minus_one(x) + q * x.sinh()) + one_minus_r * y * ch;
        let dr = num / ysh;
        if x >= 0.0 {
            // θ = arcsin r ∈ (0, π/2]
            let expo = t * beta - y * ch * cb;
            let dtheta = if cb > 0.0 { dr / cb } else { -1.0 };
            (expo, dtheta)
        } else {
            // θ = π − arcsin r ∈ [π/2, π)
            let expo = -t * beta + y * ch * cb;
            let dtheta = if cb > 0.0 { -dr / cb } else { -1.0 };
            (expo, dtheta)
        }
    }
}

fn oscillatory(t: f64, y: f64, target: f64, transition: bool) -> (f64, f64) {
    let g = SaddleGeometry::new(t, y);
    let s_join = g.c / t; // where the level set meets Im t = π
    let per_piece = target / 4.0;

    // Branch through the saddle: e^{ic} ∫ e^{E(s)} (1 + i θ'(s)) ds.
    let pair = |s: f64| {
        let (e, dth) = g.branch(s);
        let w = e.exp();
        Complex64::new(w, w * dth)
    };

    // Left end of the inward branch: where E drops below −CUTOFF, or s_join.
    let left = {
        let e_join = g.branch(s_join).0;
        if e_join > -CUTOFF {
            s_join
        } else {
            let (mut lo, mut hi) = (s_join, g.a);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g.branch(mid).0 > -CUTOFF {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        }
    };
    let mut right = g.a + 1e-3;
    while g.branch(right).0 > -CUTOFF {
        right = g.a + 2.0 * (right - g.a);
    }

    let opts = options(per_piece, transition, 2);
    let inward: QuadResult<Complex64> = adaptive_gk_unchecked(&pair, left, g.a, opts);
    let outward: QuadResult<Complex64> = adaptive_gk_unchecked(&pair, g.a, right, opts);
    let p = inward.value.re + outward.value.re;
    let dq = inward.value.im + outward.value.im;
    let (sin_c, cos_c) = g.c.sin_cos();
    let mut value = cos_c * p - sin_c * dq;
    let phase_err = 4.0 * f64::EPSILON * (g.c.abs() + 1.0) * (p.abs() + dq.abs());
    let tails = 2.0 * (-CUTOFF).exp() * (right - left + 1.0);
    let mut err = inward.abs_err + outward.abs_err + phase_err + tails;

    // Horizontal piece on Im t = π: Re ∫₀^{c/T} exp(y cosh s − πT/2) e^{iTs} ds.
    let e_top = y * s_join.cosh() - FRAC_PI_2 * t;
    if e_top > -CUTOFF {
        let h = |s: f64| (y * s.cosh() - FRAC_PI_2 * t).exp() * (t * s).cos();
        let opts = QuadOptions {
            abs_tol: per_piece,
            rel_tol: 0.0,
            max_panels: 20_000,
            initial_panels: ((t * s_join / 3.0).ceil() as usize).clamp(1, 4000),
        };
        let top: QuadResult<f64> = adaptive_gk_unchecked(&h, 0.0, s_join, opts);
        value += top.value;
        err += top.abs_err;
    } else {
        err += e_top.exp() * s_join;
    }
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(t: f64, y: f64) -> f64 {
        scaled_bessel_k(t, y, 1e-13).unwrap().value
    }

    #[test]
    fn k0_at_one() {
        assert!((k(0.0, 1.0) - 0.421_024_438_240_708_3).abs() < 1e-14);
    }

    #[test]
    fn k0_large_argument_limit() {
        let y: f64 = 50.0;
        let v = scaled_bessel_k(0.0, y, 1e-14).unwrap().value;
        let ratio = v * y.exp() * (2.0 * y / std::f64::consts::PI).sqrt();
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            scaled_bessel_k(1.0, 0.0, 1e-12),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            scaled_bessel_k(1.0, -2.0, 1e-12),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            scaled_bessel_k(-1.0, 2.0, 1e-12),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            scaled_bessel_k(1.0, 2.0, 1e-16),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn continuous_across_turning_point() {
        let t = 100.0;
        let a = k(t, t * (1.0 - 1e-12));
        let b = k(t, t);
        let c = k(t, t * (1.0 + 1e-12));
        assert!(
            (a - b).abs() < 1e-10 && (b - c).abs() < 1e-10,
            "{a} {b} {c}"
        );
    }

    #[test]
    fn regimes_classified() {
        assert_eq!(regime(1000.0, 10.0), BesselRegime::Oscillatory);
        assert_eq!(regime(1000.0, 1040.0), BesselRegime::Transition);
        assert_eq!(regime(1000.0, 1100.0), BesselRegime::Monotone);
        assert_eq!(regime(0.0, 0.5), BesselRegime::Monotone);
    }

    #[test]
    fn saddle_helpers_are_cancellation_free() {
        assert!((sinh_minus_x(1e-3) - (1e-9 / 6.0 + 1e-15 / 120.0)).abs() < 1e-24);
        assert!((sinh_minus_x(0.3) - (0.3f64.sinh() - 0.3)).abs() < 1e-16);
        assert!((cosh_minus_one(1e-5) - (5e-11 + 1e-20 / 24.0)).abs() < 1e-25);
    }
}
