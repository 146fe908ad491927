use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{ln_gamma, ln_sin, POLE_THRESHOLD};
use crate::error::{Error, Result};
use crate::quad::ComplexKahanSum;

/// Largest |Im s| accepted by [`zeta`].
pub const ZETA_MAX_IM: f64 = 1e5;

/// B_{2k} for k = 1..=20, as numerator / denominator.
const BERNOULLI_2K: [(f64, f64); 20] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174_611.0, 330.0),
    (854_513.0, 138.0),
    (-236_364_091.0, 2730.0),
    (8_553_103.0, 6.0),
    (-23_749_461_029.0, 870.0),
    (8_615_841_276_005.0, 14322.0),
    (-7_709_321_041_217.0, 510.0),
    (2_577_687_858_367.0, 6.0),
    (-26_315_271_553_053_477_373.0, 1_919_190.0),
    (2_929_993_913_841_559.0, 6.0),
    (-261_082_718_496_449_122_051.0, 13530.0),
];

/// B_{2k}/(2k)! for k = 1..=20.
fn bernoulli_over_factorial() -> &'static [f64; 20] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; 20]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 20];
        let mut fact = 1.0;
        for (i, slot) in t.iter_mut().enumerate() {
            let m = 2 * (i + 1);
            fact *= ((m - 1) * m) as f64;
            let (num, den) = BERNOULLI_2K[i];
            *slot = num / den / fact;
        }
        t
    })
}

/// Riemann zeta function.
///
/// Euler–Maclaurin summation with N = max(20, ⌈|Im s|⌉) terms on
/// Re s ≥ 1/2, and the functional equation to the left of that.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain(format!("zeta at non-finite argument {s}")));
    }
    if s.im.abs() > ZETA_MAX_IM {
        return Err(Error::domain(format!(
            "zeta: |Im s| = {} exceeds {ZETA_MAX_IM}",
            s.im.abs()
        )));
    }
    if (s - 1.0).norm() < POLE_THRESHOLD {
        return Err(Error::Pole {
            function: "zeta",
            at: format!("{s}"),
        });
    }
    // Euler–Maclaurin is itself an analytic continuation, so it also covers
    // the neighbourhood of s = 0 where the reflected side has a pole.
    if s.re >= 0.5 || s.norm() < 0.25 {
        Ok(euler_maclaurin(s))
    } else {
        reflect(s)
    }
}

fn euler_maclaurin(s: Complex64) -> Complex64 {
    if s.re > 60.0 {
        // 2^{-s} is already below binary64 resolution relative to 1.
        return Complex64::new(1.0, 0.0) + Complex64::new(2.0, 0.0).powc(-s);
    }
    let n = 20usize.max(s.im.abs().ceil() as usize);
    let mut head = ComplexKahanSum::new();
    for k in 1..n {
        head.add((-s * (k as f64).ln()).exp());
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp(); // N^{-s}
    let mut total = head.value() + n_pow * nf / (s - 1.0) + n_pow * 0.5;

    // Σ B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1}
    let bf = bernoulli_over_factorial();
    let mut rising = s; // s(s+1)…(s+2k-2) for k = 1
    let mut npow = n_pow / nf; // N^{-s-1}
    let mut prev = f64::INFINITY;
    for (k, b) in bf.iter().enumerate() {
        let term = rising * npow * *b;
        let mag = term.norm();
        if mag > prev {
            // Asymptotic series started to diverge; stop at the smallest term.
            break;
        }
        total += term;
        if mag < 1e-17 * total.norm() {
            break;
        }
        prev = mag;
        let j = 2.0 * (k + 1) as f64;
        rising *= (s + (j - 1.0)) * (s + j);
        npow /= nf * nf;
    }
    total
}

/// ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s), assembled in log space.
fn reflect(s: Complex64) -> Result<Complex64> {
    let one_minus = Complex64::new(1.0, 0.0) - s;
    let z = euler_maclaurin(one_minus);
    let w = s * (PI / 2.0);
    let ln_chi = s * 2f64.ln() + (s - 1.0) * super::gamma::LN_PI + ln_sin(w) + ln_gamma(one_minus)?;
    Ok(ln_chi.exp() * z)
}

/// The functional-equation residual |ζ(s) − χ(s)ζ(1−s)| / max(1, |ζ(s)|),
/// evaluating both sides independently through Euler–Maclaurin.
pub fn functional_equation_residual(s: Complex64) -> Result<f64> {
    let lhs = euler_maclaurin(s);
    let rhs = {
        let one_minus = Complex64::new(1.0, 0.0) - s;
        let w = s * (PI / 2.0);
        let ln_chi =
            s * 2f64.ln() + (s - 1.0) * super::gamma::LN_PI + ln_sin(w) + ln_gamma(one_minus)?;
        ln_chi.exp() * euler_maclaurin(one_minus)
    };
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}
