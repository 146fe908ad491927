//! Special-function kernels: scaled K-Bessel of imaginary order, complex
//! log-gamma, zeta, J₀, the Eisenstein normalisation constants and the
//! Mellin transforms of V_T and V_T².

mod bessel_k;
mod gamma;
mod j0;
mod mellin;
mod table;
mod zeta;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bessel_k::{
    monotone_asymptotic, regime, scaled_bessel_k, scaled_v, transition_halfwidth, BesselRegime,
    ScaledBesselValue, MIN_TARGET,
};
pub use gamma::{gamma, ln_gamma, ln_gamma_real, POLE_THRESHOLD};
pub use j0::{bessel_j0, j0_bessel_integral, j0_series};
pub use mellin::{gamma_vt_quadrature_scaled, gamma_vt_squared_quadrature_scaled};
pub use table::{negligible_argument, ScaledKTable, NEGLIGIBLE_LOG};
pub use zeta::{functional_equation_residual, zeta, ZETA_MAX_IM};

use crate::error::{Error, Result};
use gamma::LN_PI;

/// Normalisation data of E*_T = (θ/|θ|)·E(·, 1/2 + iT), θ(s) = π^{-s}Γ(s)ζ(2s).
///
/// |θ(1/2+iT)| decays like e^{−πT/2}, so the raw values `theta_half` and
/// `rho_star_1` under/overflow for T ≳ 450. Everything downstream uses the
/// logarithms and `rho_star_1_scaled` = ρ*(1)·e^{−πT/2}.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EisensteinConstants {
    #[serde(rename = "T")]
    pub t: f64,
    /// log θ(1/2 + iT) (analytic branch of log Γ plus principal log ζ)
    pub ln_theta_half: Complex64,
    /// θ(1/2 + iT); underflows to zero for large T.
    pub theta_half: Complex64,
    /// θ/|θ|
    pub mu: Complex64,
    /// ρ*(1) = (2/π)^{1/2} |θ(1/2+iT)|^{-1}; may be +∞ for large T.
    pub rho_star_1: f64,
    pub ln_rho_star_1: f64,
    /// ρ*(1)·e^{−πT/2}
    pub rho_star_1_scaled: f64,
    pub zeta_1_plus_2it: Complex64,
}

/// θ(1/2+iT), its phase μ and ρ*(1), for T ≥ 1.
pub fn eisenstein_constants(t: f64) -> Result<EisensteinConstants> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "eisenstein_constants requires T >= 1, got {t}"
        )));
    }
    let s = Complex64::new(0.5, t);
    let z = zeta(Complex64::new(1.0, 2.0 * t))?;
    let ln_theta = -s * LN_PI + ln_gamma(s)? + z.ln();
    let mu = Complex64::from_polar(1.0, ln_theta.im);
    let ln_rho = 0.5 * (2.0 / PI).ln() - ln_theta.re;
    Ok(EisensteinConstants {
        t,
        ln_theta_half: ln_theta,
        theta_half: ln_theta.exp(),
        mu,
        rho_star_1: ln_rho.exp(),
        ln_rho_star_1: ln_rho,
        rho_star_1_scaled: (ln_rho - FRAC_PI_2 * t).exp(),
        zeta_1_plus_2it: z,
    })
}

/// log γ_{V_T}(1/2 + s) = log[2^{-3/2} π^{-s} Γ((1/2+s+iT)/2) Γ((1/2+s−iT)/2)].
pub fn ln_gamma_vt(t: f64, s: Complex64) -> Result<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    let it = Complex64::new(0.0, t);
    Ok(-1.5 * 2f64.ln() - s * LN_PI
        + ln_gamma((half + s + it) * 0.5)?
        + ln_gamma((half + s - it) * 0.5)?)
}

/// γ_{V_T}(1/2 + s) = ∫₀^∞ V_T(2πy) y^s dy/y.
pub fn gamma_vt(t: f64, s: Complex64) -> Result<Complex64> {
    Ok(ln_gamma_vt(t, s)?.exp())
}

/// e^{πT/2} γ_{V_T}(1/2 + s), finite for large T.
pub fn gamma_vt_scaled(t: f64, s: Complex64) -> Result<Complex64> {
    Ok((ln_gamma_vt(t, s)? + FRAC_PI_2 * t).exp())
}

/// log γ_{V_T²}(1 + s) = log[2^{-2} π^{-s} Γ((1+s+2iT)/2) Γ((1+s)/2)² Γ((1+s−2iT)/2) / Γ(1+s)].
pub fn ln_gamma_vt_squared(t: f64, s: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let two_it = Complex64::new(0.0, 2.0 * t);
    Ok(-2.0 * 2f64.ln() - s * LN_PI
        + ln_gamma((one + s + two_it) * 0.5)?
        + 2.0 * ln_gamma((one + s) * 0.5)?
        + ln_gamma((one + s - two_it) * 0.5)?
        - ln_gamma(one + s)?)
}

/// γ_{V_T²}(1 + s) = ∫₀^∞ V_T(2πy)² y^s dy/y.
pub fn gamma_vt_squared(t: f64, s: Complex64) -> Result<Complex64> {
    Ok(ln_gamma_vt_squared(t, s)?.exp())
}

/// e^{πT} γ_{V_T²}(1 + s).
pub fn gamma_vt_squared_scaled(t: f64, s: Complex64) -> Result<Complex64> {
    Ok((ln_gamma_vt_squared(t, s)? + PI * t).exp())
}
