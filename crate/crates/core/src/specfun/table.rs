//! Per-T interpolation table for the scaled kernel e^{πT/2} K_{iT}(u).
//!
//! The series for E*_T needs the kernel at u = 2πny for every n and every
//! grid point y, which is far too many contour quadratures. In x = log u the
//! kernel oscillates with local frequency √(T² − u²) ≤ T, so panels of width
//! 8/T in x carry at most ~4 radians of phase and a degree-24 Chebyshev
//! interpolant reproduces them to rounding level. Past the turning point the
//! kernel decays super-exponentially and is cut off where it drops below
//! e^{-92}.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par::{try_map_indexed, Exec};

use super::bessel_k::{monotone_asymptotic, scaled_bessel_k};

const NODES: usize = 25;
/// Kernel values beyond the cutoff are below this (relative to O(1)).
pub const NEGLIGIBLE_LOG: f64 = -92.0;
/// Accepted interpolation error; see [`ScaledKTable::build`].
const TABLE_TOLERANCE: f64 = 5e-11;

/// Per-node accuracy request. For u ≪ T the kernel is a cosine of a phase of
/// size ~T log(2T/u), whose binary64 rounding alone is ~ε T log(2T/u).
fn node_target(t: f64) -> f64 {
    5e-13 * (1.0 + t / 500.0)
}

/// Piecewise Chebyshev interpolant of u ↦ e^{πT/2} K_{iT}(u) on [u_lo, ∞).
#[derive(Clone, Debug)]
pub struct ScaledKTable {
    t: f64,
    x_lo: f64,
    x_cut: f64,
    width: f64,
    coeffs: Vec<[f64; NODES]>,
    error_bound: f64,
}

/// The smallest u ≥ T + 12 T^{1/3} beyond which 2× the monotone asymptotic
/// (an upper envelope of the scaled kernel there) stays below e^{log_eps}.
pub fn negligible_argument(t: f64, log_eps: f64) -> f64 {
    let log_env = |u: f64| (2.0 * monotone_asymptotic(t, u)).ln();
    let mut lo = t + 12.0 * t.cbrt() + 1.0;
    if log_env(lo) <= log_eps {
        return lo;
    }
    let mut hi = 2.0 * lo + 10.0;
    while log_env(hi) > log_eps {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if log_env(mid) > log_eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

impl ScaledKTable {
    /// Builds the table on [u_lo, cutoff]. Fails with an accuracy error if
    /// any node evaluation or the interpolation estimate misses 5·10⁻¹¹.
    pub fn build(t: f64, u_lo: f64, exec: Exec) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite() && u_lo > 0.0) {
            return Err(Error::domain(format!(
                "kernel table needs T >= 0, u_lo > 0 (T={t}, u_lo={u_lo})"
            )));
        }
        let u_cut = negligible_argument(t, NEGLIGIBLE_LOG).max(u_lo * 1.5);
        let x_lo = u_lo.ln();
        let x_cut = u_cut.ln();
        let max_width = (8.0 / t.max(1.0)).min(0.25);
        let panels = ((x_cut - x_lo) / max_width).ceil().max(1.0) as usize;
        let width = (x_cut - x_lo) / panels as f64;

        let cheb_x: Vec<f64> = (0..NODES)
            .map(|k| (PI * (k as f64 + 0.5) / NODES as f64).cos())
            .collect();
        let per_panel = try_map_indexed(exec, panels, |p| -> Result<([f64; NODES], f64)> {
            let mid = x_lo + width * (p as f64 + 0.5);
            let mut f = [0.0; NODES];
            let mut node_err: f64 = 0.0;
            for (k, xk) in cheb_x.iter().enumerate() {
                let u = (mid + 0.5 * width * xk).exp();
                let v = scaled_bessel_k(t, u, node_target(t))?;
                f[k] = v.value;
                node_err = node_err.max(v.abs_error_bound);
            }
            let c = chebyshev_coefficients(&f);
            let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // tail of the coefficient sequence as truncation estimate,
            // Lebesgue constant of 25 Chebyshev nodes (< 3.2) for node errors
            let est = 4.0 * (c[NODES - 1].abs() + c[NODES - 2].abs())
                + 3.2 * node_err
                + 64.0 * f64::EPSILON * scale;
            Ok((c, est))
        })?;
        let error_bound = per_panel.iter().fold(0.0f64, |m, (_, e)| m.max(*e));
        if error_bound > TABLE_TOLERANCE {
            return Err(Error::accuracy(
                format!("kernel table at T={t}"),
                error_bound,
                TABLE_TOLERANCE,
            ));
        }
        Ok(Self {
            t,
            x_lo,
            x_cut,
            width,
            coeffs: per_panel.into_iter().map(|(c, _)| c).collect(),
            error_bound,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn u_lo(&self) -> f64 {
        self.x_lo.exp()
    }

    /// Beyond this argument the table returns 0.
    pub fn cutoff(&self) -> f64 {
        self.x_cut.exp()
    }

    /// Estimated uniform absolute error of [`Self::value_at_log`], plus the
    /// dropped region (≤ e^{-92}).
    pub fn error_bound(&self) -> f64 {
        self.error_bound + NEGLIGIBLE_LOG.exp()
    }

    pub fn panels(&self) -> usize {
        self.coeffs.len()
    }

    /// Scaled kernel at u = e^x. Arguments below the table range are a
    /// caller bug and panic in debug builds; past the cutoff the value is 0.
    #[inline]
    pub fn value_at_log(&self, x: f64) -> f64 {
        debug_assert!(
            x >= self.x_lo - 1e-12,
            "kernel table queried below its range"
        );
        if x >= self.x_cut {
            return 0.0;
        }
        let r = ((x - self.x_lo) / self.width).max(0.0);
        let p = (r as usize).min(self.coeffs.len() - 1);
        let local = 2.0 * (r - p as f64) - 1.0;
        clenshaw(&self.coeffs[p], local.clamp(-1.0, 1.0))
    }

    pub fn value(&self, u: f64) -> f64 {
        self.value_at_log(u.ln())
    }
}

fn chebyshev_coefficients(f: &[f64; NODES]) -> [f64; NODES] {
    let n = NODES as f64;
    let mut c = [0.0; NODES];
    for (j, cj) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, fk) in f.iter().enumerate() {
            s += fk * (PI * j as f64 * (k as f64 + 0.5) / n).cos();
        }
        *cj = 2.0 * s / n;
    }
    c[0] *= 0.5;
    c
}

#[inline]
fn clenshaw(c: &[f64; NODES], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    let x2 = 2.0 * x;
    for &ck in c[1..].iter().rev() {
        let b0 = ck + x2 * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_kernel() {
        let t = 60.0;
        let table = ScaledKTable::build(t, 2.0, Exec::Sequential).unwrap();
        assert!(table.error_bound() < TABLE_TOLERANCE);
        for k in 0..97 {
            let u = 2.0 + k as f64 * 0.913;
            let direct = scaled_bessel_k(t, u, 1e-12).unwrap().value;
            let interp = table.value(u);
            assert!(
                (direct - interp).abs() < 1e-11,
                "u={u}: {direct} vs {interp}"
            );
        }
    }

    #[test]
    fn cutoff_is_past_turning_point_and_negligible() {
        for t in [10.0, 100.0, 1000.0] {
            let u = negligible_argument(t, NEGLIGIBLE_LOG);
            assert!(u > t + 12.0 * t.cbrt());
            let v = scaled_bessel_k(t, u, 1e-14).unwrap().value;
            assert!(v.abs() < 1e-39, "T={t}: {v}");
        }
    }

    #[test]
    fn clenshaw_reproduces_polynomials() {
        // T_3(x) = 4x³ − 3x
        let mut c = [0.0; NODES];
        c[3] = 1.0;
        for x in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert!((clenshaw(&c, x) - (4.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
        }
    }
}
