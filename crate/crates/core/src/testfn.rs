//! Smooth compactly supported test functions ψ, their norms and Mellin
//! transforms ψ̃(s) = ∫₀^∞ ψ(y) y^s dy/y.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive_gk, ComplexKahanSum, QuadOptions};

/// ∫ψ₀(x)dx over (−1/2, 1/2).
pub const PSI0_INTEGRAL: f64 = 0.221_996_908_084_039_72;
/// ∫ψ₀(x)²dx.
pub const PSI0_SQ_INTEGRAL: f64 = 0.066_543_060_422_497_136;
/// ∫ψ₀′(x)²dx.
pub const PSI0_DERIV_SQ_INTEGRAL: f64 = 0.819_174_121_505_540_26;

/// Frozen derivative constants: sup|ψ₀^{(j)}| ≤ C_j for j = 1, 2, 3 (measured
/// values 1.596860, 30.998820, 1491.199371, rounded up; the higher
/// derivatives peak near x = ±0.45, not at the centre), so that
/// sup|ψ^{(j)}| ≤ C_j A^j for ψ(y) = ψ₀((y − center)/width), A = 1/width.
pub const DERIVATIVE_CONSTANTS: [f64; 3] = [1.6, 31.0, 1491.2];

/// Every admissible bump lives inside this window.
pub const SUPPORT_WINDOW: (f64, f64) = (0.9, 3.4);

/// Lower bound ‖ψ²‖₁·A ≥ c₀: on a support inside [0.9, 3.4],
/// ∫ψ²dy/y ≥ width·∫ψ₀²/3.4.
pub const C0_LOWER: f64 = PSI0_SQ_INTEGRAL / 3.4;

/// A^{-2}∫ψ′²dy/y ≤ C·‖ψ²‖₁ with C = (3.4/0.9)·∫ψ₀′²/∫ψ₀², since 1/y varies
/// by at most that factor across the window.
pub const DERIV_RELATION_CONSTANT: f64 = 3.4 / 0.9 * PSI0_DERIV_SQ_INTEGRAL / PSI0_SQ_INTEGRAL;

/// The base profile ψ₀(x) = exp(−1/(1 − 4x²)) on (−1/2, 1/2).
#[inline]
pub fn psi0(x: f64) -> f64 {
    let p = 1.0 - 4.0 * x * x;
    if p <= 0.0 {
        0.0
    } else {
        (-1.0 / p).exp()
    }
}

/// ψ₀^{(j)}(x) for j ≤ 3, from ψ₀ = e^g with g = −1/p, p = 1 − 4x².
pub fn psi0_derivative(x: f64, j: usize) -> f64 {
    let p = 1.0 - 4.0 * x * x;
    if p <= 0.0 {
        return 0.0;
    }
    let base = (-1.0 / p).exp();
    if base == 0.0 {
        return 0.0;
    }
    let (p2, p3) = (p * p, p * p * p);
    let g1 = -8.0 * x / p2;
    let g2 = -8.0 / p2 - 128.0 * x * x / p3;
    let g3 = -384.0 * x / p3 - 3072.0 * x * x * x / (p3 * p);
    let factor = match j {
        0 => 1.0,
        1 => g1,
        2 => g2 + g1 * g1,
        3 => g3 + 3.0 * g1 * g2 + g1 * g1 * g1,
        _ => panic!("psi0_derivative supports j <= 3"),
    };
    factor * base
}

/// ψ(y) = ψ₀((y − center)/width).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub center: f64,
    pub width: f64,
    /// Derivative scale, 1/width.
    #[serde(rename = "A")]
    pub a: f64,
}

impl BumpFunction {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center.is_finite()) {
            return Err(Error::domain(format!("bump needs width > 0, got {width}")));
        }
        let (lo, hi) = (center - 0.5 * width, center + 0.5 * width);
        if lo < SUPPORT_WINDOW.0 - 1e-12 || hi > SUPPORT_WINDOW.1 + 1e-12 {
            return Err(Error::Window {
                y: if lo < SUPPORT_WINDOW.0 { lo } else { hi },
                lo: SUPPORT_WINDOW.0,
                hi: SUPPORT_WINDOW.1,
            });
        }
        Ok(Self {
            center,
            width,
            a: 1.0 / width,
        })
    }

    /// The bump without the window restriction (for scaling experiments).
    pub fn unchecked(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            a: 1.0 / width,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.center - 0.5 * self.width,
            self.center + 0.5 * self.width,
        )
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        psi0((y - self.center) / self.width)
    }

    /// ψ^{(j)}(y), j ≤ 3.
    pub fn derivative(&self, y: f64, j: usize) -> f64 {
        psi0_derivative((y - self.center) / self.width, j) * self.a.powi(j as i32)
    }

    /// Support in x = log y.
    pub fn log_support(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        (lo.ln(), hi.ln())
    }
}

/// ψ_{T,j}(y) = ψ₀((y − (1 + jT^{−δ}))/T^{−δ}).
pub fn bump_family(t: f64, delta: f64, j: usize) -> Result<BumpFunction> {
    if !(delta > 0.0 && delta < 1.0 / 51.0) {
        return Err(Error::domain(format!(
            "bump family needs 0 < delta < 1/51, got {delta}"
        )));
    }
    if !(t >= 1.0) {
        return Err(Error::domain(format!("bump family needs T >= 1, got {t}")));
    }
    let count = family_size(t, delta);
    if j < 1 || j > count {
        return Err(Error::Range(format!(
            "bump index j={j} outside [1, {count}]"
        )));
    }
    let width = t.powf(-delta);
    BumpFunction::new(1.0 + j as f64 * width, width)
}

/// ⌈T^δ⌉, the number of windows in the family.
pub fn family_size(t: f64, delta: f64) -> usize {
    t.powf(delta).ceil() as usize
}

/// ‖ψ²‖₁ = ∫ψ²dy/y, ‖ψ‖₂ = (∫ψ²dy/y)^{1/2} and ∫ψ′²dy/y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiNorms {
    pub l1_sq: f64,
    pub l2: f64,
    pub deriv_l2: f64,
}

pub fn psi_norms(psi: &BumpFunction) -> Result<PsiNorms> {
    let (lo, hi) = psi.support();
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_panels: 2000,
        initial_panels: 8,
    };
    let l1_sq = adaptive_gk(|y: f64| psi.eval(y).powi(2) / y, lo, hi, opts)?.value;
    let deriv = adaptive_gk(|y: f64| psi.derivative(y, 1).powi(2) / y, lo, hi, opts)?.value;
    Ok(PsiNorms {
        l1_sq,
        l2: l1_sq.sqrt(),
        deriv_l2: deriv,
    })
}

/// ∫ψ(y)dy (= ψ̃(1)).
pub fn psi_integral(psi: &BumpFunction) -> f64 {
    psi.width * PSI0_INTEGRAL
}

/// Mellin transform evaluator for one bump.
///
/// In x = log y, ψ̃(s) = ∫ψ(e^x)e^{sx}dx is the integral of a smooth function
/// whose derivatives all vanish at both ends of its support, so the
/// trapezoid rule converges faster than any power of the node count. The node
/// count is chosen for the largest |Im s| the evaluator will see and checked
/// against the half-size rule there.
#[derive(Clone, Debug)]
pub struct MellinEvaluator {
    xs: Vec<f64>,
    weights: Vec<f64>,
    max_im: f64,
    error_estimate: f64,
}

impl MellinEvaluator {
    /// Evaluator accurate for |Im s| ≤ max_im and −3 < Re s < 3.
    pub fn new(psi: &BumpFunction, max_im: f64) -> Result<Self> {
        let (x1, x2) = psi.log_support();
        let len = x2 - x1;
        // start with ~6 nodes per radian of the worst oscillation
        let mut n = ((6.0 * max_im * len) as usize).max(64).next_power_of_two();
        let probe = [
            Complex64::new(-2.9, max_im),
            Complex64::new(0.0, max_im),
            Complex64::new(2.9, 0.5 * max_im),
        ];
        loop {
            let fine = Self::with_nodes(psi, n, max_im);
            let coarse = Self::with_nodes(psi, n / 2, max_im);
            let mass = fine.abs_mass(3.0);
            let diff = probe
                .iter()
                .map(|s| (fine.raw(*s) - coarse.raw(*s)).norm())
                .fold(0.0, f64::max);
            if diff <= 1e-14 * mass {
                let mut ev = fine;
                ev.error_estimate = diff + 1e-15 * mass;
                return Ok(ev);
            }
            if n >= 1 << 22 {
                return Err(Error::accuracy(
                    "Mellin transform node selection",
                    diff,
                    1e-14 * mass,
                ));
            }
            n *= 2;
        }
    }

    fn with_nodes(psi: &BumpFunction, n: usize, max_im: f64) -> Self {
        let (x1, x2) = psi.log_support();
        let h = (x2 - x1) / n as f64;
        let mut xs = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 1..n {
            let x = x1 + h * k as f64;
            let w = psi.eval(x.exp()) * h;
            if w != 0.0 {
                xs.push(x);
                weights.push(w);
            }
        }
        Self {
            xs,
            weights,
            max_im,
            error_estimate: 0.0,
        }
    }

    fn abs_mass(&self, sigma_abs: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * (sigma_abs * x.abs()).exp())
            .sum()
    }

    fn raw(&self, s: Complex64) -> Complex64 {
        let mut acc = ComplexKahanSum::new();
        for (x, w) in self.xs.iter().zip(&self.weights) {
            acc.add((s * x).exp() * w);
        }
        acc.value()
    }

    /// ψ̃(s).
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        if !(s.re > -3.0 && s.re < 3.0) {
            return Err(Error::domain(format!(
                "psi_mellin needs -3 < Re s < 3, got {}",
                s.re
            )));
        }
        if s.im.abs() > self.max_im * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "|Im s| = {} exceeds the evaluator range {}",
                s.im.abs(),
                self.max_im
            )));
        }
        Ok(self.raw(s))
    }

    /// Estimated absolute error (half-grid comparison at the worst frequency).
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn nodes(&self) -> usize {
        self.xs.len()
    }
}

/// ψ̃(s) = ∫₀^∞ ψ(y) y^s dy/y for −3 < Re s < 3.
pub fn psi_mellin(psi: &BumpFunction, s: Complex64) -> Result<Complex64> {
    MellinEvaluator::new(psi, s.im.abs().max(1.0))?.eval(s)
}

/// Upper bound for |ψ̃(σ+it)| from the trivial estimate and from three
/// integrations by parts:
/// |ψ̃(s)| ≤ min(∫ψ y^{σ−1}dy, C₃A³·width·max y^{σ+2} / |s(s+1)(s+2)|).
pub fn mellin_decay_bound(psi: &BumpFunction, s: Complex64) -> f64 {
    let (lo, hi) = psi.support();
    let ymax = |p: f64| lo.powf(p).max(hi.powf(p));
    let trivial = psi_integral(psi) * ymax(s.re - 1.0);
    let denom = (s * (s + 1.0) * (s + 2.0)).norm();
    let ibp = DERIVATIVE_CONSTANTS[2] * psi.a.powi(3) * psi.width * ymax(s.re + 2.0) / denom;
    trivial.min(ibp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_geometry() {
        let t: f64 = 1e4;
        let delta = 0.019;
        let w = t.powf(-delta);
        let b = bump_family(t, delta, 1).unwrap();
        assert!((b.center - (1.0 + w)).abs() < 1e-15);
        assert!((b.width - w).abs() < 1e-15);
        assert!((b.eval(b.center) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(family_size(1000.0, 0.019), 2);
        assert!(matches!(
            bump_family(1000.0, 0.019, 3),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            bump_family(1000.0, 0.019, 0),
            Err(Error::Range(_))
        ));
        assert!(bump_family(1000.0, 0.05, 1).is_err());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for &x in &[-0.4, -0.21, 0.0, 0.13, 0.37, 0.45] {
            let h = 1e-5;
            for j in 1..=3 {
                let fd =
                    (psi0_derivative(x + h, j - 1) - psi0_derivative(x - h, j - 1)) / (2.0 * h);
                let an = psi0_derivative(x, j);
                assert!(
                    (fd - an).abs() < 1e-6 * (1.0 + an.abs()),
                    "x={x} j={j}: {fd} vs {an}"
                );
            }
        }
    }

    #[test]
    fn frozen_derivative_constants_hold() {
        let b = BumpFunction::new(2.0, 0.25).unwrap();
        for j in 1..=3 {
            let sup = (0..=200_000)
                .map(|k| {
                    b.derivative(b.center - 0.5 * b.width + b.width * k as f64 / 200_000.0, j)
                        .abs()
                })
                .fold(0.0, f64::max);
            assert!(
                sup <= DERIVATIVE_CONSTANTS[j - 1] * b.a.powi(j as i32),
                "j={j}"
            );
            // and the constants are not loose
            assert!(
                sup >= 0.995 * DERIVATIVE_CONSTANTS[j - 1] * b.a.powi(j as i32),
                "j={j}"
            );
        }
    }

    #[test]
    fn norms_scale_with_width() {
        let wide = psi_norms(&BumpFunction::new(2.0, 0.1).unwrap()).unwrap();
        let narrow = psi_norms(&BumpFunction::new(2.0, 0.01).unwrap()).unwrap();
        let ratio = (wide.l1_sq / 0.1) / (narrow.l1_sq / 0.01);
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
        // ∫ψ²dy/y ≈ width·∫ψ₀²/center
        assert!((narrow.l1_sq - 0.01 * PSI0_SQ_INTEGRAL / 2.0).abs() < 1e-4 * narrow.l1_sq);
    }

    #[test]
    fn mellin_at_one_is_plain_integral() {
        let b = BumpFunction::new(1.7, 0.5).unwrap();
        let v = psi_mellin(&b, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - psi_integral(&b)).abs() < 1e-10);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn mellin_matches_adaptive_quadrature() {
        let b = BumpFunction::new(2.0, 0.5).unwrap();
        let ev = MellinEvaluator::new(&b, 200.0).unwrap();
        for s in [
            Complex64::new(0.5, 37.0),
            Complex64::new(-2.0, 199.0),
            Complex64::new(2.5, -3.0),
        ] {
            let (lo, hi) = b.support();
            let opts = QuadOptions {
                abs_tol: 1e-15,
                rel_tol: 0.0,
                max_panels: 4000,
                initial_panels: 64,
            };
            let q = adaptive_gk(
                |y: f64| Complex64::new(0.0, 0.0) + (s * y.ln()).exp() * (b.eval(y) / y),
                lo,
                hi,
                opts,
            )
            .unwrap()
            .value;
            assert!((ev.eval(s).unwrap() - q).norm() < 1e-13, "{s}");
        }
    }
}
