//! Shifted divisor sums Σ_n τ_{iT}(n) τ_{iT}(n+m) w(n), their main term
//!
//!   M.T. = Σ_± (|ζ(1+2iT)|²/ζ(2)) σ_{−1}(m) ∫ (x+m)^{∓iT} x^{±iT} w(x) dx,
//!
//! and the error-term envelope |m|^θ T^{1/3} Y^{1/2} R² + T^{1/6} Y^{3/4} R^{1/2}
//! with θ = 7/64 and R = P + T|m|/Y.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{build_tau_table_with, sigma_minus_one, tau_direct, DivisorCoefficientTable};
use crate::error::{Error, Result};
use crate::par::{try_map_indexed, Exec};
use crate::quad::{adaptive_gk, gauss_legendre, KahanSum, QuadOptions};
use crate::specfun::zeta;
use crate::testfn::{psi0, PSI0_INTEGRAL};

/// Exponent θ in the |m|^θ factor of the error term.
pub const THETA: f64 = 7.0 / 64.0;
/// Desk-scale guard on the window size.
pub const MAX_Y: f64 = 1e7;

const STEP_CELLS: usize = 4096;
const STEP_GL: usize = 10;

/// S(u) = ∫_{−1/2}^{u−1/2} ψ₀ / ∫ψ₀: a C^∞ step, 0 for u ≤ 0 and 1 for u ≥ 1.
///
/// Tabulated at 4096 cell boundaries by 10-point Gauss–Legendre per cell;
/// values in between add a Gauss–Legendre integral over the partial cell,
/// which is accurate to rounding since ψ₀ is smooth on a cell this small.
pub struct SmoothStep {
    cumulative: Vec<f64>,
    total: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SmoothStep {
    fn build() -> Self {
        let (nodes, weights) = gauss_legendre(STEP_GL);
        let h = 1.0 / STEP_CELLS as f64;
        let mut cumulative = Vec::with_capacity(STEP_CELLS + 1);
        let mut acc = KahanSum::new();
        cumulative.push(0.0);
        for c in 0..STEP_CELLS {
            let a = c as f64 * h;
            acc.add(gl_integral(&nodes, &weights, a, a + h));
            cumulative.push(acc.value());
        }
        // normalize by the computed total rather than the constant, so that
        // S(1) = 1 exactly
        let total = cumulative[STEP_CELLS];
        debug_assert!((total - PSI0_INTEGRAL).abs() < 1e-14);
        for v in cumulative.iter_mut() {
            *v /= total;
        }
        Self {
            cumulative,
            total,
            nodes,
            weights,
        }
    }

    /// The shared instance.
    pub fn get() -> &'static SmoothStep {
        static STEP: OnceLock<SmoothStep> = OnceLock::new();
        STEP.get_or_init(SmoothStep::build)
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let r = u * STEP_CELLS as f64;
        let c = (r as usize).min(STEP_CELLS - 1);
        let a = c as f64 / STEP_CELLS as f64;
        self.cumulative[c] + gl_integral(&self.nodes, &self.weights, a, u) / self.total
    }
}

/// ∫_a^b ψ₀(x − 1/2) dx by one Gauss–Legendre panel.
fn gl_integral(nodes: &[f64], weights: &[f64], a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        s += w * psi0(mid + half * x - 0.5);
    }
    s * half
}

/// One shifted-sum problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScsInstance {
    #[serde(rename = "T")]
    pub t: f64,
    pub m: i64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "P")]
    pub p: f64,
    /// The window is w(x − shift); 0 for the standard window on [Y, 2Y].
    pub shift: i64,
}

impl ScsInstance {
    pub fn new(t: f64, y: f64, p: f64, m: i64) -> Result<Self> {
        if !(t >= 1.0 && t.is_finite()) {
            return Err(Error::domain(format!("shifted sums need T >= 1, got {t}")));
        }
        if m == 0 {
            return Err(Error::domain("shift m must be nonzero"));
        }
        if !(p >= 1.0 && p <= y) {
            return Err(Error::domain(format!("need 1 <= P <= Y (P={p}, Y={y})")));
        }
        if y > MAX_Y {
            return Err(Error::Capacity {
                what: "shifted sum window Y",
                requested: y as u64,
                limit: MAX_Y as u64,
            });
        }
        Ok(Self {
            t,
            m,
            y,
            p,
            shift: 0,
        })
    }

    /// Same problem with the window translated by `shift`.
    pub fn shifted(self, shift: i64) -> Self {
        Self { shift, ..self }
    }

    /// R = P + T|m|/Y.
    pub fn r(&self) -> f64 {
        self.p + self.t * self.m.unsigned_abs() as f64 / self.y
    }

    /// w(x) = S((x−Y)/(Y/P))·S((2Y−x)/(Y/P)), translated by `shift`.
    pub fn window(&self, x: f64) -> f64 {
        let x = x - self.shift as f64;
        let ramp = self.y / self.p;
        let step = SmoothStep::get();
        step.eval((x - self.y) / ramp) * step.eval((2.0 * self.y - x) / ramp)
    }

    /// Integers n with w(n) possibly nonzero.
    pub fn support(&self) -> (i64, i64) {
        (
            self.y.floor() as i64 + self.shift,
            (2.0 * self.y).ceil() as i64 + self.shift,
        )
    }

    /// Largest |n| or |n + m| the sum touches.
    pub fn tau_extent(&self) -> usize {
        let (lo, hi) = self.support();
        [lo, hi, lo + self.m, hi + self.m]
            .iter()
            .map(|v| v.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// |m|^θ T^{1/3} Y^{1/2} R² + T^{1/6} Y^{3/4} R^{1/2}.
    pub fn et_bound(&self) -> f64 {
        let r = self.r();
        (self.m.unsigned_abs() as f64).powf(THETA) * self.t.cbrt() * self.y.sqrt() * r * r
            + self.t.powf(1.0 / 6.0) * self.y.powf(0.75) * r.sqrt()
    }

    /// The size condition R ≤ 0.1·T/(TY)^{0.01} under which the sweep runs.
    pub fn condition_value(&self) -> f64 {
        self.r() / (0.1 * self.t / (self.t * self.y).powf(0.01))
    }
}

/// Σ_n τ(n) τ(n+m) w(n) using a precomputed table covering
/// [`ScsInstance::tau_extent`]. Terms with n = 0 or n + m = 0 are skipped;
/// negative arguments use τ(|k|).
pub fn scs_brute_with(inst: &ScsInstance, tau: &DivisorCoefficientTable) -> Result<f64> {
    if tau.t() != inst.t {
        return Err(Error::domain(format!(
            "tau table is for T={}, instance has T={}",
            tau.t(),
            inst.t
        )));
    }
    if tau.n_max() < inst.tau_extent() {
        return Err(Error::Capacity {
            what: "tau table for shifted sum",
            requested: inst.tau_extent() as u64,
            limit: tau.n_max() as u64,
        });
    }
    let (lo, hi) = inst.support();
    let mut acc = KahanSum::new();
    for n in lo..=hi {
        let k = n + inst.m;
        if n == 0 || k == 0 {
            continue;
        }
        let w = inst.window(n as f64);
        if w != 0.0 {
            acc.add(tau.get(n.unsigned_abs() as usize) * tau.get(k.unsigned_abs() as usize) * w);
        }
    }
    Ok(acc.value())
}

/// [`scs_brute_with`] with its own table.
pub fn scs_brute(inst: &ScsInstance) -> Result<f64> {
    let tau = build_tau_table_with(inst.t, inst.tau_extent(), Exec::default())?;
    scs_brute_with(inst, &tau)
}

/// The same sum with every τ computed by enumerating divisors.
pub fn scs_naive(inst: &ScsInstance) -> f64 {
    let (lo, hi) = inst.support();
    let mut acc = KahanSum::new();
    for n in lo..=hi {
        let k = n + inst.m;
        if n == 0 || k == 0 {
            continue;
        }
        let w = inst.window(n as f64);
        if w != 0.0 {
            acc.add(
                tau_direct(inst.t, n.unsigned_abs()) * tau_direct(inst.t, k.unsigned_abs()) * w,
            );
        }
    }
    acc.value()
}

/// ∫(x+m)^{−iT} x^{iT} w(x) dx over the window.
///
/// Integrated piecewise: each ramp of width Y/P in 64 panels, the plateau in
/// panels covering at most 1/40 of an oscillation of T·log((x+m)/x), each
/// panel adaptively refined to 10⁻¹³ relative.
pub fn scs_oscillatory_integral(inst: &ScsInstance) -> Result<Complex64> {
    let shift = inst.shift as f64;
    let x_lo = inst.y + shift;
    let x_hi = 2.0 * inst.y + shift;
    let m = inst.m as f64;
    if x_lo + m.min(0.0) <= 0.0 || x_lo <= 0.0 {
        return Err(Error::domain("window must stay in x > max(0, −m)"));
    }
    let ramp = inst.y / inst.p;
    let phase = |x: f64| inst.t * (x / (x + m)).ln();
    // phase derivative magnitude T|m|/(x(x+m)) is largest at the left end
    let max_freq = inst.t * m.abs() / (x_lo * (x_lo + m));
    let osc_len = if max_freq > 0.0 {
        2.0 * PI / max_freq
    } else {
        f64::INFINITY
    };
    let mut breaks = Vec::new();
    let push_uniform = |a: f64, b: f64, width: f64, out: &mut Vec<f64>| {
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        for k in 0..n {
            out.push(a + (b - a) * k as f64 / n as f64);
        }
    };
    push_uniform(x_lo, x_lo + ramp, ramp / 64.0, &mut breaks);
    if x_hi - ramp > x_lo + ramp {
        push_uniform(x_lo + ramp, x_hi - ramp, osc_len / 40.0, &mut breaks);
    }
    push_uniform(
        (x_hi - ramp).max(x_lo + ramp),
        x_hi,
        ramp / 64.0,
        &mut breaks,
    );
    breaks.push(x_hi);
    breaks.dedup();
    if breaks.len() > 4_000_000 {
        return Err(Error::Capacity {
            what: "main-term quadrature panels",
            requested: breaks.len() as u64,
            limit: 4_000_000,
        });
    }
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_panels: 64,
        initial_panels: 1,
    };
    let f = |x: f64| Complex64::from_polar(inst.window(x), phase(x));
    let pieces = try_map_indexed(Exec::default(), breaks.len() - 1, |k| {
        adaptive_gk(
            f,
            breaks[k],
            breaks[k + 1],
            QuadOptions {
                abs_tol: 1e-15 * (breaks[k + 1] - breaks[k]),
                ..opts
            },
        )
        .map(|r| r.value)
    })?;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for p in pieces {
        re.add(p.re);
        im.add(p.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// 2·Re[(|ζ(1+2iT)|²/ζ(2)) σ_{−1}(m) ∫(x+m)^{−iT}x^{iT}w(x)dx].
pub fn scs_main_term(inst: &ScsInstance) -> Result<f64> {
    let z = zeta(Complex64::new(1.0, 2.0 * inst.t))?;
    let zeta2 = PI * PI / 6.0;
    let sigma = sigma_minus_one(inst.m)?;
    let integral = scs_oscillatory_integral(inst)?;
    Ok(2.0 * z.norm_sqr() / zeta2 * sigma * integral.re)
}

/// One row of a sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScsReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub m: i64,
    pub brute_sum: f64,
    pub main_term: f64,
    pub error: f64,
    pub et_bound: f64,
    pub ratio: f64,
    /// R/(0.1·T/(TY)^{0.01}); ≤ 1 inside the size condition
    pub condition: f64,
}

impl ScsReport {
    pub const CSV_HEADER: &'static str = "T,Y,P,m,brute,main_term,error,et_bound,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.y,
            self.p,
            self.m,
            self.brute_sum,
            self.main_term,
            self.error,
            self.et_bound,
            self.ratio
        )
    }
}

/// Report for one instance against a shared table.
pub fn scs_report_with(inst: &ScsInstance, tau: &DivisorCoefficientTable) -> Result<ScsReport> {
    let brute = scs_brute_with(inst, tau)?;
    let mt = scs_main_term(inst)?;
    let et = inst.et_bound();
    let error = (brute - mt).abs();
    Ok(ScsReport {
        t: inst.t,
        y: inst.y,
        p: inst.p,
        m: inst.m,
        brute_sum: brute,
        main_term: mt,
        error,
        et_bound: et,
        ratio: error / et,
        condition: inst.condition_value(),
    })
}

/// Rows for all m in the list plus the summed comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScsSweep {
    pub rows: Vec<ScsReport>,
    /// Σ_m error
    pub total_error: f64,
    /// M·T^{1/3}Y^{1/2}R² + M·T^{1/6}Y^{3/4}R^{1/2} with R = P + TM/Y and
    /// M = max |m|
    pub summed_bound: f64,
}

impl ScsSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ScsReport::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Sweeps the shifts in `ms` at one (T, Y, P), sharing one τ table.
pub fn scs_sweep(t: f64, y: f64, p: f64, ms: &[i64], exec: Exec) -> Result<ScsSweep> {
    let insts = ms
        .iter()
        .map(|&m| ScsInstance::new(t, y, p, m))
        .collect::<Result<Vec<_>>>()?;
    let extent = insts.iter().map(|i| i.tau_extent()).max().unwrap_or(1);
    let tau = Arc::new(build_tau_table_with(t, extent, exec)?);
    let rows = try_map_indexed(exec, insts.len(), |k| scs_report_with(&insts[k], &tau))?;
    let big_m = ms.iter().map(|m| m.unsigned_abs()).max().unwrap_or(0) as f64;
    let r = p + t * big_m / y;
    let summed_bound =
        big_m * t.cbrt() * y.sqrt() * r * r + big_m * t.powf(1.0 / 6.0) * y.powf(0.75) * r.sqrt();
    let total_error = rows.iter().map(|r| r.error).sum();
    Ok(ScsSweep {
        rows,
        total_error,
        summed_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_shape() {
        let s = SmoothStep::get();
        assert_eq!(s.eval(-0.1), 0.0);
        assert_eq!(s.eval(1.3), 1.0);
        assert!((s.eval(0.5) - 0.5).abs() < 1e-15);
        // S(u) + S(1 − u) = 1 by symmetry of ψ₀
        for u in [0.013, 0.2, 0.377, 0.61] {
            assert!((s.eval(u) + s.eval(1.0 - u) - 1.0).abs() < 1e-14);
        }
        let mut prev = 0.0;
        for k in 0..=200 {
            let v = s.eval(k as f64 / 200.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn window_is_plateau() {
        let inst = ScsInstance::new(10.0, 1000.0, 4.0, 1).unwrap();
        assert_eq!(inst.window(999.0), 0.0);
        assert_eq!(inst.window(1500.0), 1.0);
        assert_eq!(inst.window(2000.5), 0.0);
        assert!(inst.window(1100.0) > 0.0 && inst.window(1100.0) < 1.0);
    }

    #[test]
    fn preconditions() {
        assert!(ScsInstance::new(0.0, 1e4, 4.0, 1).is_err());
        assert!(ScsInstance::new(50.0, 1e4, 4.0, 0).is_err());
        assert!(ScsInstance::new(50.0, 1e4, 0.5, 1).is_err());
        assert!(matches!(
            ScsInstance::new(50.0, 2e7, 4.0, 1),
            Err(Error::Capacity { .. })
        ));
    }
}
