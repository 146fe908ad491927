//! Direct quadrature of the Mellin transforms of V_T(2πy) and V_T(2πy)²,
//! the numerical counterparts of [`super::gamma_vt`] and
//! [`super::gamma_vt_squared`].

use std::f64::consts::PI;

use num_complex::Complex64;

use super::table::{negligible_argument, ScaledKTable};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::quad::{adaptive_gk, QuadOptions};

/// ∫ over x = log y of y^s·g(2πy), where g(u) is a power of √u·K̃(u),
/// with `decay` the exponent of y in the integrand's small-y envelope.
fn mellin_of(t: f64, s: Complex64, power: i32, decay: f64) -> Result<Complex64> {
    if !(decay > 0.0) {
        return Err(Error::domain(format!(
            "Mellin quadrature diverges at 0 for Re s = {}",
            s.re
        )));
    }
    // below y = e^{x_lo} the integrand is below e^{−32}·(kernel scale)
    let x_lo = -32.0 / decay;
    let u_lo = 2.0 * PI * x_lo.exp();
    let table = ScaledKTable::build(t, u_lo, Exec::Sequential)?;
    let x_hi = (negligible_argument(t, -60.0) / (2.0 * PI)).ln();
    let f = |x: f64| {
        let y = x.exp();
        let u = 2.0 * PI * y;
        let v = u.sqrt() * table.value(u);
        (s * x).exp() * v.powi(power)
    };
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_panels: 20_000,
        initial_panels: ((x_hi - x_lo) * t.max(1.0)).ceil() as usize,
    };
    Ok(adaptive_gk(f, x_lo, x_hi, opts)?.value)
}

/// e^{πT/2}·∫₀^∞ V_T(2πy) y^s dy/y by quadrature; compare with
/// [`super::gamma_vt_scaled`]. Needs Re s > −1/2.
pub fn gamma_vt_quadrature_scaled(t: f64, s: Complex64) -> Result<Complex64> {
    mellin_of(t, s, 1, s.re + 0.5)
}

/// e^{πT}·∫₀^∞ V_T(2πy)² y^s dy/y by quadrature; compare with
/// [`super::gamma_vt_squared_scaled`]. Needs Re s > −1.
pub fn gamma_vt_squared_quadrature_scaled(t: f64, s: Complex64) -> Result<Complex64> {
    mellin_of(t, s, 2, s.re + 1.0)
}
