//! Quadrature building blocks: compensated accumulation, Gauss–Legendre
//! rules, and adaptive Gauss–Kronrod (21-point) integration over real or
//! complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that quadrature rules can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of complex values (componentwise).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a slice, in slice order.
pub fn sum_compensated(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<KahanSum>().value()
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod panel with its embedded 10-point Gauss estimate.
/// Returns (kronrod value, |kronrod - gauss|, integral of |f|).
pub fn gk21<V, F>(f: &F, a: f64, b: f64) -> (V, f64, f64)
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK21[10];
    let mut gauss = V::zero();
    let mut resabs = fc.magnitude() * WGK21[10];
    for j in 0..10 {
        let dx = half * XGK21[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kron = kron + pair * WGK21[j];
        resabs += WGK21[j] * (f1.magnitude() + f2.magnitude());
        // Gauss nodes are the odd-indexed Kronrod abscissae.
        if j % 2 == 1 {
            gauss = gauss + pair * WG10[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = (kron - gauss).magnitude();
    (kron, err, resabs * half.abs())
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<V> {
    pub value: V,
    pub abs_err: f64,
    pub evals: usize,
    /// 20ε·∫|f|, the level below which `abs_err` cannot be pushed.
    pub rounding_floor: f64,
}

/// Tolerances for [`adaptive_gk`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_panels: 4000,
            initial_panels: 1,
        }
    }
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
    resabs: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The returned error is the sum of the per-panel Kronrod–Gauss differences,
/// floored at a rounding level proportional to the integral of |f|. An
/// [`Error::Accuracy`] is raised when the tolerance cannot be met within
/// `max_panels` subdivisions. A tolerance below the rounding floor counts as
/// met once the truncation estimate drops under the floor.
pub fn adaptive_gk<V, F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let res = adaptive_gk_unchecked(&f, a, b, opts);
    let target = opts.abs_tol.max(opts.rel_tol * res.value.magnitude());
    if res.abs_err > target.max(res.rounding_floor) {
        return Err(Error::accuracy(
            format!("adaptive quadrature on [{a}, {b}]"),
            res.abs_err,
            target,
        ));
    }
    Ok(res)
}

/// Same as [`adaptive_gk`] but returns the best estimate even if the
/// tolerance was not met; callers inspect `abs_err`.
pub fn adaptive_gk_unchecked<V, F>(f: &F, a: f64, b: f64, opts: QuadOptions) -> QuadResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if a == b {
        return QuadResult {
            value: V::zero(),
            abs_err: 0.0,
            evals: 0,
            rounding_floor: 0.0,
        };
    }
    let n0 = opts.initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(n0 + 64);
    let mut evals = 0;
    let mut err_sum = 0.0;
    let mut abs_sum = 0.0;
    let mut value_est = V::zero();
    let step = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + step * i as f64;
        let hi = if i + 1 == n0 {
            b
        } else {
            a + step * (i + 1) as f64
        };
        let (v, e, ra) = gk21(f, lo, hi);
        evals += 21;
        err_sum += e;
        abs_sum += ra;
        value_est = value_est + v;
        heap.push(Panel {
            a: lo,
            b: hi,
            value: v,
            err: e,
            resabs: ra,
        });
    }
    let floor_of = |abs_mass: f64| 20.0 * f64::EPSILON * abs_mass;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value_est.magnitude());
        let floor = floor_of(abs_sum);
        let done = err_sum <= target.max(floor) || heap.len() >= opts.max_panels;
        if done {
            // Running sums drift slightly; recompute exactly before deciding.
            let (value, err, abs_mass) = heap_totals(&heap);
            let floor = floor_of(abs_mass);
            let target = opts.abs_tol.max(opts.rel_tol * value.magnitude());
            if err <= target.max(floor) || heap.len() >= opts.max_panels {
                return QuadResult {
                    value,
                    abs_err: err.max(floor),
                    evals,
                    rounding_floor: floor,
                };
            }
            err_sum = err;
            abs_sum = abs_mass;
            value_est = value;
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in binary64.
            heap.push(worst);
            let (value, err, abs_mass) = heap_totals(&heap);
            let floor = floor_of(abs_mass);
            return QuadResult {
                value,
                abs_err: err.max(floor),
                evals,
                rounding_floor: floor,
            };
        }
        let (v1, e1, r1) = gk21(f, worst.a, mid);
        let (v2, e2, r2) = gk21(f, mid, worst.b);
        evals += 42;
        err_sum += e1 + e2 - worst.err;
        abs_sum += r1 + r2 - worst.resabs;
        value_est = value_est + v1 + v2 - worst.value;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
            resabs: r1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
            resabs: r2,
        });
    }
}

fn heap_totals<V: QuadValue>(heap: &BinaryHeap<Panel<V>>) -> (V, f64, f64) {
    // Sum in interval order so the result does not depend on heap layout.
    let mut panels: Vec<&Panel<V>> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = V::zero();
    let mut err = 0.0;
    let mut abs_mass = 0.0;
    for p in panels {
        value = value + p.value;
        err += p.err;
        abs_mass += p.resabs;
    }
    (value, err, abs_mass)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` nodes.
pub fn composite_gauss<V, F>(f: F, a: f64, b: f64, panels: usize, order: usize) -> V
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = V::zero();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let c = lo + 0.5 * h;
        let mut panel = V::zero();
        for (xi, wi) in x.iter().zip(&w) {
            panel = panel + f(c + 0.5 * h * xi) * *wi;
        }
        acc = acc + panel * (0.5 * h);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-15);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let r = adaptive_gk(
            |x: f64| (-1e4 * (x - 0.3).powi(2)).exp(),
            0.0,
            1.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (std::f64::consts::PI / 1e4).sqrt();
        assert!((r.value - exact).abs() < 1e-14, "{} vs {}", r.value, exact);
    }

    #[test]
    fn adaptive_complex_oscillatory() {
        let r: QuadResult<Complex64> = adaptive_gk(
            |x: f64| Complex64::new(0.0, 40.0 * x).exp(),
            0.0,
            1.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 40.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn adaptive_reports_failure() {
        let opts = QuadOptions {
            max_panels: 2,
            ..QuadOptions::default()
        };
        let r = adaptive_gk(|x: f64| (200.0 * x).sin().abs(), 0.0, 10.0, opts);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum_compensated(&xs), 2.0);
    }
}
