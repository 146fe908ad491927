//! E*_T(iy) on the imaginary axis through its Fourier expansion
//!
//!   E*_T(iy) = 2√y Re(μ y^{iT}) + 2ρ*(1) Σ_{n≥1} τ_{iT}(n) n^{-1/2} V_T(2πny),
//!
//! and a sign-change counter along a segment of the axis.
//!
//! With V_T(u) = √u K_{iT}(u), the n-th term is 2ρ*(1) τ_{iT}(n) √(2πy) K_{iT}(2πny),
//! and ρ*(1)K_{iT} is formed as (ρ*(1)e^{−πT/2})·(e^{πT/2}K_{iT}) so that no
//! intermediate over- or underflows.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{build_tau_table_with, DivisorCoefficientTable};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};
use crate::quad::KahanSum;
use crate::specfun::{
    eisenstein_constants, monotone_asymptotic, EisensteinConstants, ScaledKTable,
};

/// Default evaluation window around the segment [1, 3].
pub const DEFAULT_WINDOW: (f64, f64) = (0.9, 3.4);

/// Truncation index ⌈(T + 12T^{1/3} + 40)/(2π y_lo)⌉.
pub fn truncation_index(t: f64, y_lo: f64) -> usize {
    ((t + 12.0 * t.cbrt() + 40.0) / (2.0 * PI * y_lo)).ceil() as usize
}

/// Options for [`build_series_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SeriesOptions {
    /// Replace the default truncation index (must not be smaller).
    pub n_max: Option<usize>,
    pub exec: Exec,
}

/// The truncated Fourier expansion of E*_T on a window [y_lo, y_hi].
#[derive(Clone, Debug)]
pub struct EisensteinSeries {
    pub t: f64,
    pub constants: EisensteinConstants,
    pub tau: Arc<DivisorCoefficientTable>,
    pub n_max: usize,
    /// Uniform bound on the discarded terms n > n_max over the window.
    pub tail_bound: f64,
    /// Uniform bound on the accumulated kernel interpolation error.
    pub kernel_error_bound: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    kernel: Arc<ScaledKTable>,
    /// log(2πn), n = 1..=n_max (index n−1)
    ln_2pi_n: Vec<f64>,
    /// 2ρ*(1)e^{−πT/2}·τ(n)·√(2π), n = 1..=n_max
    coef: Vec<f64>,
}

/// Builds the series on `window` with the default truncation rule.
pub fn build_series(t: f64, window: (f64, f64)) -> Result<EisensteinSeries> {
    build_series_with(t, window, SeriesOptions::default())
}

pub fn build_series_with(
    t: f64,
    window: (f64, f64),
    opts: SeriesOptions,
) -> Result<EisensteinSeries> {
    if !(t >= 10.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "build_series needs T >= 10, got {t}"
        )));
    }
    let (y_lo, y_hi) = window;
    if !(y_lo > 0.0 && y_hi > y_lo && y_hi.is_finite()) {
        return Err(Error::domain(format!("invalid window [{y_lo}, {y_hi}]")));
    }
    let rule = truncation_index(t, y_lo);
    let n_max = match opts.n_max {
        Some(n) if n < rule => {
            return Err(Error::domain(format!(
                "n_max = {n} is below the truncation rule {rule}"
            )))
        }
        Some(n) => n,
        None => rule,
    };
    let constants = eisenstein_constants(t)?;
    let tau = build_tau_table_with(t, n_max, opts.exec)?;
    let kernel = ScaledKTable::build(t, 2.0 * PI * y_lo, opts.exec)?;
    let rho = constants.rho_star_1_scaled;
    let sqrt_2pi = (2.0 * PI).sqrt();
    let coef: Vec<f64> = (1..=n_max)
        .map(|n| 2.0 * rho * tau.get(n) * sqrt_2pi)
        .collect();
    let ln_2pi_n: Vec<f64> = (1..=n_max).map(|n| (2.0 * PI * n as f64).ln()).collect();
    let abs_coef: f64 = coef.iter().map(|c| c.abs()).sum();
    let kernel_error_bound = abs_coef * y_hi.sqrt() * kernel.error_bound();
    let tail_bound = series_tail_bound(t, rho, n_max, y_lo, y_hi);
    Ok(EisensteinSeries {
        t,
        constants,
        tau: Arc::new(tau),
        n_max,
        tail_bound,
        kernel_error_bound,
        y_lo,
        y_hi,
        kernel: Arc::new(kernel),
        ln_2pi_n,
        coef,
    })
}

/// Σ_{n>n_max} 2ρ̃ d(n) √(2π y_hi) · 2·(monotone asymptotic at 2πn y_lo),
/// with d(n) ≤ 2√n. The kernel is decreasing in u past the turning point
/// and twice its leading asymptotic bounds it there. Terms are summed until
/// they fall below 10⁻³⁰⁰ relative to the first, the rest by a geometric
/// series with the last observed ratio.
fn series_tail_bound(t: f64, rho_scaled: f64, n_max: usize, y_lo: f64, y_hi: f64) -> f64 {
    let pref = 2.0 * rho_scaled * (2.0 * PI * y_hi).sqrt();
    let term = |n: usize| {
        let u = 2.0 * PI * n as f64 * y_lo;
        pref * 2.0 * (n as f64).sqrt() * 2.0 * monotone_asymptotic(t, u)
    };
    let first = term(n_max + 1);
    let mut sum = first;
    let mut prev = first;
    let mut n = n_max + 2;
    loop {
        let cur = term(n);
        if cur == 0.0 || cur < 1e-300 * first.max(1e-300) {
            break;
        }
        let ratio = cur / prev;
        sum += cur;
        if ratio < 0.5 && cur < 1e-20 * sum {
            sum += cur * ratio / (1.0 - ratio);
            break;
        }
        prev = cur;
        n += 1;
    }
    sum
}

impl EisensteinSeries {
    /// E*_T(iy) for y in the window.
    pub fn eval(&self, y: f64) -> Result<f64> {
        self.check_window(y)?;
        Ok(self.eval_unchecked(y))
    }

    /// E*_T(iy) together with its error bound (tail + kernel accumulation).
    pub fn eval_with_error(&self, y: f64) -> Result<(f64, f64)> {
        let v = self.eval(y)?;
        Ok((v, self.error_bound()))
    }

    /// Uniform absolute error bound of [`Self::eval`] on the window.
    pub fn error_bound(&self) -> f64 {
        self.tail_bound + self.kernel_error_bound
    }

    fn check_window(&self, y: f64) -> Result<()> {
        if !(y >= self.y_lo && y <= self.y_hi) {
            return Err(Error::Window {
                y,
                lo: self.y_lo,
                hi: self.y_hi,
            });
        }
        Ok(())
    }

    /// The constant term 2√y Re(μ y^{iT}).
    pub fn constant_term(&self, y: f64) -> f64 {
        let ln_y = y.ln();
        let phase = self.constants.mu.arg() + self.t * ln_y;
        2.0 * y.sqrt() * phase.cos()
    }

    /// The non-constant part 2ρ*(1) Σ τ(n) n^{-1/2} V_T(2πny).
    pub fn nonconstant_term(&self, y: f64) -> f64 {
        let ln_y = y.ln();
        let cut = self.kernel_cut_log();
        let mut acc = KahanSum::new();
        for (c, l) in self.coef.iter().zip(&self.ln_2pi_n) {
            let x = l + ln_y;
            if x >= cut {
                break;
            }
            acc.add(c * self.kernel.value_at_log(x));
        }
        y.sqrt() * acc.value()
    }

    #[inline]
    fn kernel_cut_log(&self) -> f64 {
        self.kernel.cutoff().ln()
    }

    /// E*_T(iy) without the window check (y must still satisfy 2πy ≥ 2πy_lo).
    pub fn eval_unchecked(&self, y: f64) -> f64 {
        self.constant_term(y) + self.nonconstant_term(y)
    }

    /// Values on a list of abscissae.
    pub fn eval_grid(&self, ys: &[f64], exec: Exec) -> Result<Vec<f64>> {
        for &y in ys {
            self.check_window(y)?;
        }
        Ok(map_indexed(exec, ys.len(), |i| self.eval_unchecked(ys[i])))
    }
}

/// Result of a sign-change count on [a, b].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SignChangeReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub interval: [f64; 2],
    pub count: usize,
    pub zeros: Vec<f64>,
    pub grid_points: usize,
    /// Smallest distance between consecutive zeros (b − a if fewer than two).
    pub min_gap: f64,
    /// Count on the base grid (every other point of the evaluated grid).
    pub base_count: usize,
    /// Whether the base and doubled grids agree; `count` is the doubled value.
    pub grid_stable: bool,
    /// Grid points where |E*| fell below the noise threshold.
    pub near_zero_points: Vec<f64>,
}

/// Counting parameters.
#[derive(Clone, Copy, Debug)]
pub struct CountOptions {
    /// Base grid size; `None` means max(4096, ⌈64T(b − a)⌉).
    pub grid_points: Option<usize>,
    /// Refinement stops at this bracket width.
    pub tolerance: f64,
    /// Zeros closer than this are merged.
    pub merge_distance: f64,
    pub exec: Exec,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            grid_points: None,
            tolerance: 1e-12,
            merge_distance: 1e-11,
            exec: Exec::default(),
        }
    }
}

/// Default base grid size max(4096, ⌈64T(b − a)⌉).
pub fn default_grid_points(t: f64, a: f64, b: f64) -> usize {
    4096usize.max((64.0 * t * (b - a)).ceil() as usize)
}

/// Counts sign changes of E*_T(iy) on [a, b].
pub fn count_sign_changes(series: &EisensteinSeries, a: f64, b: f64) -> Result<SignChangeReport> {
    count_sign_changes_with(series, a, b, CountOptions::default())
}

pub fn count_sign_changes_with(
    series: &EisensteinSeries,
    a: f64,
    b: f64,
    opts: CountOptions,
) -> Result<SignChangeReport> {
    if !(a >= series.y_lo && b <= series.y_hi && a < b) {
        return Err(Error::Window {
            y: if a < series.y_lo { a } else { b },
            lo: series.y_lo,
            hi: series.y_hi,
        });
    }
    let noise = 10.0 * (series.tail_bound + 1e-12);
    count_sign_changes_of(|y| series.eval_unchecked(y), series.t, a, b, noise, opts)
}

/// The counting procedure for an arbitrary function; used with surrogate
/// functions in tests.
///
/// The function is sampled on a grid uniform in log y with 2N − 1 points
/// (the base grid of N points plus midpoints). Sign alternations between
/// neighbours with nonzero values are bracketed and refined by bisection;
/// a sample that is exactly zero is itself a zero when its neighbours differ
/// in sign.
pub fn count_sign_changes_of<F>(
    f: F,
    t: f64,
    a: f64,
    b: f64,
    noise: f64,
    opts: CountOptions,
) -> Result<SignChangeReport>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if !(a > 0.0 && b > a) {
        return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
    }
    let base = opts
        .grid_points
        .unwrap_or_else(|| default_grid_points(t, a, b))
        .max(2);
    let fine = 2 * base - 1;
    let (la, lb) = (a.ln(), b.ln());
    let step = (lb - la) / (fine - 1) as f64;
    let grid_y = |k: usize| {
        if k == fine - 1 {
            b
        } else {
            (la + step * k as f64).exp()
        }
    };
    let values = map_indexed(opts.exec, fine, |k| f(grid_y(k)));

    let near_zero_points: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() < noise)
        .map(|(k, _)| grid_y(k))
        .collect();
    if !near_zero_points.is_empty() {
        log::warn!(
            "{} grid points with |E*| below {noise:e}; double zeros may be missed",
            near_zero_points.len()
        );
    }

    let base_count = brackets(&values, 2).len();
    let fine_brackets = brackets(&values, 1);

    let roots = map_indexed(opts.exec, fine_brackets.len(), |i| {
        let (lo, hi) = fine_brackets[i];
        if lo == hi {
            return grid_y(lo);
        }
        let (mut ya, mut yb) = (grid_y(lo), grid_y(hi));
        let fa = values[lo];
        while yb - ya > opts.tolerance {
            let mid = 0.5 * (ya + yb);
            if mid <= ya || mid >= yb {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fm > 0.0) == (fa > 0.0) {
                ya = mid;
            } else {
                yb = mid;
            }
        }
        0.5 * (ya + yb)
    });

    let mut zeros: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if !(r > a && r < b) {
            continue;
        }
        match zeros.last() {
            Some(&last) if r - last < opts.merge_distance => {}
            _ => zeros.push(r),
        }
    }
    let min_gap = zeros.windows(2).map(|w| w[1] - w[0]).fold(b - a, f64::min);
    let count = zeros.len();
    Ok(SignChangeReport {
        t,
        interval: [a, b],
        count,
        zeros,
        grid_points: fine,
        min_gap,
        base_count,
        grid_stable: base_count == count,
        near_zero_points,
    })
}

/// Index pairs (i, j) of consecutive nonzero samples with opposite signs on
/// the sub-grid of the given stride; (k, k) for an exact zero between
/// opposite signs.
fn brackets(values: &[f64], stride: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last_nonzero: Option<usize> = None;
    let mut pending_zero: Option<usize> = None;
    let mut k = 0;
    while k < values.len() {
        let v = values[k];
        if v == 0.0 {
            if pending_zero.is_none() {
                pending_zero = Some(k);
            }
        } else {
            if let Some(p) = last_nonzero {
                if (values[p] > 0.0) != (v > 0.0) {
                    match pending_zero {
                        Some(z) => out.push((z, z)),
                        None => out.push((p, k)),
                    }
                }
            }
            last_nonzero = Some(k);
            pending_zero = None;
        }
        k += stride;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rule_values() {
        assert_eq!(truncation_index(100.0, 0.9), 35);
        assert_eq!(truncation_index(1000.0, 0.9), 206);
    }

    #[test]
    fn surrogate_constant_has_no_zeros() {
        let r =
            count_sign_changes_of(|_| 1.0, 50.0, 1.0, 3.0, 0.0, CountOptions::default()).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.zeros.is_empty());
        assert!(r.grid_stable);
    }

    #[test]
    fn surrogate_cosine_count() {
        let t = 200.0;
        let r = count_sign_changes_of(
            |y: f64| (t * y.ln()).cos(),
            t,
            1.0,
            3.0,
            0.0,
            CountOptions::default(),
        )
        .unwrap();
        let expect = (t * 3f64.ln() / PI).floor() as i64;
        assert!(
            (r.count as i64 - expect).abs() <= 1,
            "{} vs {expect}",
            r.count
        );
        // zeros at y = exp((k + 1/2)π/T)
        for (i, z) in r.zeros.iter().enumerate() {
            let exact = ((i as f64 + 0.5) * PI / t).exp();
            assert!((z - exact).abs() < 1e-11, "{z} vs {exact}");
        }
        assert!(r.zeros.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exact_zero_on_grid_is_counted_once() {
        let opts = CountOptions {
            grid_points: Some(5),
            ..CountOptions::default()
        };
        // zero exactly at the midpoint sample in log scale
        let mid = (2.0f64).sqrt();
        let r = count_sign_changes_of(
            move |y: f64| if y == mid { 0.0 } else { y - mid },
            1.0,
            1.0,
            2.0,
            0.0,
            opts,
        )
        .unwrap();
        assert_eq!(r.count, 1);
        assert!((r.zeros[0] - mid).abs() < 1e-12);
    }

    #[test]
    fn window_is_enforced() {
        let s = build_series(20.0, (1.0, 2.0)).unwrap();
        assert!(matches!(s.eval(0.5), Err(Error::Window { .. })));
        assert!(matches!(
            count_sign_changes(&s, 0.9, 2.0),
            Err(Error::Window { .. })
        ));
        assert!(build_series(5.0, (1.0, 2.0)).is_err());
    }

    #[test]
    fn tail_bound_small_and_monotone() {
        let s = build_series(100.0, DEFAULT_WINDOW).unwrap();
        assert_eq!(s.n_max, 35);
        assert!(s.tail_bound <= 1e-9, "{}", s.tail_bound);
        let d = build_series_with(
            100.0,
            DEFAULT_WINDOW,
            SeriesOptions {
                n_max: Some(70),
                ..SeriesOptions::default()
            },
        )
        .unwrap();
        assert!(d.tail_bound < s.tail_bound);
    }
}
