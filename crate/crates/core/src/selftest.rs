//! Invariant suites for every module, run by `eislab selftest` and by the
//! integration tests. Each check records a measured error and the tolerance
//! it is held to.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{build_tau_table_with, check_z_identity, divisors, sigma_minus_one, tau_direct};
use crate::corr::{binomial_tail_check, f_of_s, j0_partial_sum, FRoute, MellinContext};
use crate::eisen::{build_series_with, SeriesOptions, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::golden::{load_kernel_points, load_misc};
use crate::par::Exec;
use crate::scs::{scs_brute, scs_main_term, scs_naive, ScsInstance};
use crate::specfun::{
    bessel_j0, eisenstein_constants, functional_equation_residual, gamma_vt_quadrature_scaled,
    gamma_vt_scaled, gamma_vt_squared_quadrature_scaled, gamma_vt_squared_scaled, ln_gamma,
    scaled_bessel_k, zeta,
};
use crate::testfn::{psi_mellin, psi_norms, BumpFunction, C0_LOWER, DERIV_RELATION_CONSTANT};

/// Names of all suites in run order.
pub const SUITES: [&str; 8] = [
    "specfun", "ode", "mellin", "arith", "testfn", "eisen", "corr", "scs",
];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Measured error (or other quantity held below `tolerance`).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
    /// Set when the suite could not run to completion.
    pub error: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// Passes when `value <= tolerance` (NaN fails).
    fn le(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.0.push(Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        });
    }

    /// Relative error |got − want|/|want|.
    fn rel(&mut self, name: impl Into<String>, got: f64, want: f64, tolerance: f64) {
        self.le(name, (got - want).abs() / want.abs(), tolerance);
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.0.push(Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        });
    }
}

/// Runs one suite by name. Golden data is read from `golden_dir`.
pub fn run_suite(name: &str, golden_dir: &Path, exec: Exec) -> SuiteReport {
    let start = Instant::now();
    let mut checks = Checks::default();
    let outcome = match name {
        "specfun" => specfun_suite(&mut checks, golden_dir),
        "ode" => ode_suite(&mut checks),
        "mellin" => mellin_suite(&mut checks),
        "arith" => arith_suite(&mut checks, exec),
        "testfn" => testfn_suite(&mut checks),
        "eisen" => eisen_suite(&mut checks, golden_dir, exec),
        "corr" => corr_suite(&mut checks, golden_dir, exec),
        "scs" => scs_suite(&mut checks),
        other => Err(Error::domain(format!("unknown suite '{other}'"))),
    };
    SuiteReport {
        suite: name.to_string(),
        checks: checks.0,
        seconds: start.elapsed().as_secs_f64(),
        error: outcome.err().map(|e| e.to_string()),
    }
}

pub fn run_all(golden_dir: &Path, exec: Exec) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .map(|s| run_suite(s, golden_dir, exec))
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn specfun_suite(ch: &mut Checks, dir: &Path) -> Result<()> {
    for p in load_kernel_points(dir)? {
        let v = scaled_bessel_k(p.t, p.y, 1e-13)?;
        ch.rel(
            format!("kernel T={} y={}", p.t, p.y),
            v.value,
            p.scaled_k,
            1e-10,
        );
        ch.le(
            format!("kernel bound T={} y={}", p.t, p.y),
            v.abs_error_bound,
            1e-10 * v.value.abs().max(1.0),
        );
    }
    let misc = load_misc(dir)?;
    let lg = ln_gamma(c(0.5, 50.0))?;
    let want = c(
        misc.ln_gamma_half_plus_50i[0],
        misc.ln_gamma_half_plus_50i[1],
    );
    ch.le("ln_gamma(1/2+50i)", (lg - want).norm() / want.norm(), 1e-12);
    for (label, s, w) in [
        ("zeta(1/2+100i)", c(0.5, 100.0), misc.zeta_half_plus_100i),
        ("zeta(1+200i)", c(1.0, 200.0), misc.zeta_1_plus_200i),
    ] {
        let want = c(w[0], w[1]);
        ch.le(label, (zeta(s)? - want).norm() / want.norm(), 1e-10);
    }
    ch.le(
        "zeta(2)",
        (zeta(c(2.0, 0.0))?.re - PI * PI / 6.0).abs(),
        1e-14,
    );
    ch.le(
        "|zeta(1/2+14.134725i)|",
        zeta(c(0.5, 14.134725))?.norm(),
        1e-4,
    );
    // functional equation on 50 points with 0.3 ≤ Re s ≤ 0.7, |Im s| ≤ 500
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let re = 0.3 + 0.4 * ((k * 7) % 50) as f64 / 49.0;
        let im = -500.0 + 1000.0 * k as f64 / 49.0;
        worst = worst.max(functional_equation_residual(c(re, im))?);
    }
    ch.le("zeta functional equation (50 points)", worst, 1e-9);
    for (arg, want) in &misc.j0 {
        let x: f64 = arg
            .parse()
            .map_err(|_| Error::Parse(format!("bad j0 key {arg}")))?;
        ch.le(format!("J0({x})"), (bessel_j0(x)? - want).abs(), 1e-12);
    }
    ch.le("J0 first zero", bessel_j0(2.404825557695773)?.abs(), 1e-10);
    for (key, want) in &misc.eisenstein {
        let t: f64 = key
            .parse()
            .map_err(|_| Error::Parse(format!("bad constants key {key}")))?;
        let k = eisenstein_constants(t)?;
        ch.le(
            format!("ln|theta| T={t}"),
            (k.ln_theta_half.re - want.ln_theta_re).abs() / want.ln_theta_re.abs(),
            1e-12,
        );
        ch.le(
            format!("mu T={t}"),
            (k.mu - c(want.mu_re, want.mu_im)).norm(),
            1e-10,
        );
        ch.rel(
            format!("rho*(1) scaled T={t}"),
            k.rho_star_1_scaled,
            want.rho_star_1_scaled,
            1e-10,
        );
        ch.le(format!("|mu|-1 T={t}"), (k.mu.norm() - 1.0).abs(), 1e-12);
    }
    // K₀ large-argument limit
    let y = 50.0;
    let k0 = scaled_bessel_k(0.0, y, 1e-13)?.value;
    ch.le(
        "K0(50)·e^50·sqrt(100/pi) - 1",
        (k0 * y.exp() * (2.0 * y / PI).sqrt() - 1.0).abs(),
        0.01,
    );
    Ok(())
}

/// Residual of y²K'' + yK' − (y² − T²)K with a sixth-order central
/// difference stencil at h = 10⁻³y, relative to the size of the terms.
pub fn ode_residual(t: f64, y: f64) -> Result<f64> {
    const D1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -3.0 / 4.0,
        0.0,
        3.0 / 4.0,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    const D2: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let h = 1e-3 * y;
    let mut vals = [0.0; 7];
    for (i, v) in vals.iter_mut().enumerate() {
        *v = scaled_bessel_k(t, y + (i as f64 - 3.0) * h, 1e-12)?.value;
    }
    let k = vals[3];
    let k1: f64 = D1.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / h;
    let k2: f64 = D2.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / (h * h);
    let terms = [y * y * k2, y * k1, -(y * y - t * t) * k];
    let scale: f64 = terms.iter().map(|x| x.abs()).sum();
    Ok(terms.iter().sum::<f64>().abs() / scale)
}

/// The (T, y) grid of the ODE suite.
pub fn ode_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for t in [0.0, 1.0, 10.0, 50.0, 100.0, 200.0] {
        for y in [0.5, 1.0, 3.0, 10.0, 30.0] {
            g.push((t, y));
        }
        if t > 0.0 {
            for f in [0.5, 0.95, 1.0, 1.05, 1.5] {
                if !g.contains(&(t, f * t)) {
                    g.push((t, f * t));
                }
            }
        }
    }
    g
}

fn ode_suite(ch: &mut Checks) -> Result<()> {
    for (t, y) in ode_grid() {
        ch.le(format!("ODE T={t} y={y}"), ode_residual(t, y)?, 1e-4);
    }
    Ok(())
}

fn mellin_suite(ch: &mut Checks) -> Result<()> {
    for t in [5.0, 10.0, 20.0] {
        for re in [0.5, 1.0, 1.5] {
            let s = c(re, 0.0);
            let q = gamma_vt_quadrature_scaled(t, s)?;
            let want = gamma_vt_scaled(t, s)?;
            ch.le(
                format!("gamma_VT T={t} s={re}"),
                (q - want).norm() / want.norm(),
                1e-8,
            );
        }
    }
    for (t, re) in [(5.0, 1.0), (5.0, 2.0), (10.0, 1.0)] {
        let s = c(re, 0.0);
        let q = gamma_vt_squared_quadrature_scaled(t, s)?;
        let want = gamma_vt_squared_scaled(t, s)?;
        ch.le(
            format!("gamma_VT^2 T={t} s={re}"),
            (q - want).norm() / want.norm(),
            1e-8,
        );
    }
    Ok(())
}

fn arith_suite(ch: &mut Checks, exec: Exec) -> Result<()> {
    let t = 13.7;
    let table = build_tau_table_with(t, 10_000, exec)?;
    let mut worst: f64 = 0.0;
    for n in 1..=10_000u64 {
        worst = worst.max((table.get(n as usize) - tau_direct(t, n)).abs());
    }
    ch.le("sieve vs divisor pairs, n <= 1e4", worst, 1e-10);
    let mut hecke: f64 = 0.0;
    for p in (2..100usize).filter(|&p| divisors(p as u64).len() == 2) {
        hecke = hecke.max((table.get(p).powi(2) - table.get(p * p) - 1.0).abs());
    }
    ch.le("Hecke relation p < 100", hecke, 1e-10);
    let again = build_tau_table_with(t, 10_000, exec)?;
    ch.holds(
        "deterministic rebuild",
        again.as_slice() == table.as_slice(),
    );
    let seq = build_tau_table_with(t, 10_000, Exec::Sequential)?;
    ch.holds(
        "sequential and parallel builds identical",
        seq.as_slice() == table.as_slice(),
    );
    ch.le("sigma_-1(6) = 2", (sigma_minus_one(6)? - 2.0).abs(), 1e-15);
    ch.le(
        "sigma_-1(-4) = 7/4",
        (sigma_minus_one(-4)? - 1.75).abs(),
        1e-15,
    );
    let z = check_z_identity(0.0, c(4.0, 0.0), 1000)?;
    ch.le("Z identity T=0 s=4", z.residual, 1e-6);
    let z = check_z_identity(5.0, c(3.0, 0.0), 100_000)?;
    ch.le(
        "Z identity T=5 s=3 (residual / tail)",
        z.residual / z.tail_bound,
        2.0,
    );
    Ok(())
}

fn testfn_suite(ch: &mut Checks) -> Result<()> {
    let b = BumpFunction::new(2.0, 0.5)?;
    let norms = psi_norms(&b)?;
    ch.le("l1_sq * A >= c0", C0_LOWER - norms.l1_sq * b.a, 0.0);
    ch.le(
        "A^-2 int psi'^2 dy/y <= C l1_sq",
        norms.deriv_l2.powi(2) / (b.a * b.a) - DERIV_RELATION_CONSTANT * norms.l1_sq,
        0.0,
    );
    let r1 = psi_norms(&BumpFunction::new(2.0, 0.1)?)?.l1_sq / 0.1;
    let r2 = psi_norms(&BumpFunction::new(2.0, 0.01)?)?.l1_sq / 0.01;
    ch.le(
        "l1_sq scaling across widths 0.1, 0.01",
        (r1 / r2 - 1.0).abs(),
        0.02,
    );
    let m1 = psi_mellin(&b, c(1.0, 0.0))?;
    let int: f64 = crate::testfn::psi_integral(&b);
    ch.le(
        "psi~(1) = int psi dy",
        (m1.re - int).abs() + m1.im.abs(),
        1e-10,
    );
    Ok(())
}

fn eisen_suite(ch: &mut Checks, dir: &Path, exec: Exec) -> Result<()> {
    let misc = load_misc(dir)?;
    for p in &misc.eisenstein_values {
        let series = build_series_with(p.t, (0.9, 3.4), SeriesOptions { n_max: None, exec })?;
        ch.le(
            format!("E* T={} y={}", p.t, p.y),
            (series.eval(p.y)? - p.value).abs(),
            1e-9,
        );
    }
    let t = 100.0;
    let series = build_series_with(t, (1.0 / 3.4, 3.4), SeriesOptions { n_max: None, exec })?;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let y = 1.0 + 2.0 * k as f64 / 19.0;
        let a = series.eval(y)?;
        worst = worst.max((a - series.eval(1.0 / y)?).abs() / a.abs().max(1.0));
    }
    ch.le("automorphy T=100 (20 points)", worst, 1e-6);
    let def = build_series_with(t, DEFAULT_WINDOW, SeriesOptions { n_max: None, exec })?;
    ch.le("tail bound, default window", def.tail_bound, 1e-9);
    let rep = crate::eisen::count_sign_changes(&def, 1.0, 3.0)?;
    ch.holds("sign changes T=100 grid-stable", rep.grid_stable);
    ch.holds("sign changes T=100 >= 2", rep.count >= 2);
    Ok(())
}

fn corr_suite(ch: &mut Checks, dir: &Path, exec: Exec) -> Result<()> {
    for alpha in [1.0, 2.0, 4.0] {
        ch.le(
            format!("J0 identity alpha={alpha}"),
            (j0_partial_sum(alpha, 40)? - bessel_j0(alpha)?).abs(),
            1e-12,
        );
    }
    let misc = load_misc(dir)?;
    let bp = misc.binomial_residual;
    let r = binomial_tail_check(c(bp.z, 0.0), c(0.0, bp.u_im), bp.l)?;
    ch.le(
        "binomial residual vs oracle",
        (r.residual - bp.residual).abs() / bp.residual,
        1e-4,
    );
    ch.holds("binomial residual within Cauchy bound", r.within_cauchy());
    let b = BumpFunction::new(2.0, 0.5)?;
    let series = Arc::new(build_series_with(
        100.0,
        DEFAULT_WINDOW,
        SeriesOptions { n_max: None, exec },
    )?);
    let ctx = MellinContext::for_range(series, b, 10.0)?;
    let s = c(0.0, 0.3);
    let d = f_of_s(&ctx, s, FRoute::Direct)?;
    let sr = f_of_s(&ctx, s, FRoute::Series)?;
    ch.le("F(0.3i) direct vs series, T=100", (d - sr).norm(), 1e-6);
    let conj = f_of_s(&ctx, s.conj(), FRoute::Series)?;
    ch.le("F(conj s) = conj F(s)", (conj - sr.conj()).norm(), 1e-9);
    Ok(())
}

fn scs_suite(ch: &mut Checks) -> Result<()> {
    let inst = ScsInstance::new(50.0, 1e4, 4.0, 1)?;
    let brute = scs_brute(&inst)?;
    let naive = scs_naive(&inst);
    ch.le(
        "brute vs naive (T=50, Y=1e4, m=1)",
        (brute - naive).abs() / naive.abs(),
        1e-8,
    );
    let mt = scs_main_term(&inst)?;
    ch.le(
        "|brute - M.T.| / et_bound (m=1)",
        (brute - mt).abs() / inst.et_bound(),
        10.0,
    );
    let plus = ScsInstance::new(50.0, 1e4, 4.0, 3)?;
    let minus = ScsInstance::new(50.0, 1e4, 4.0, -3)?.shifted(3);
    ch.le(
        "M.T.(m) = M.T.(-m) on the shifted window",
        (scs_main_term(&plus)? - scs_main_term(&minus)?).abs() / scs_main_term(&plus)?.abs(),
        1e-8,
    );
    ch.le(
        "brute(m) = brute(-m) on the shifted window",
        (scs_brute(&plus)? - scs_brute(&minus)?).abs() / scs_brute(&plus)?.abs(),
        1e-12,
    );
    Ok(())
}
