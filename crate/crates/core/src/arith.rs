//! Divisor-type coefficients: τ_{iT}(n), σ_{−1}(m), and the Rankin–Selberg
//! identity Σ τ_{iT}(n)² n^{-s} = ζ(s−2iT)ζ(s+2iT)ζ(s)²/ζ(2s).

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};
use crate::quad::{ComplexKahanSum, KahanSum};
use crate::specfun::zeta;

/// Largest table size accepted by [`build_tau_table`].
pub const TAU_TABLE_GUARD: usize = 100_000_000;

/// Entries per parallel chunk of the sieve.
const CHUNK: usize = 1 << 15;

/// τ_{iT}(n) = Σ_{ab=n} (a/b)^{iT} for 1 ≤ n ≤ n_max, stored as reals.
///
/// Pairing a/b with b/a makes every entry 2Σ_{a<b} cos(T log(a/b)) (+1 when n
/// is a square), so the imaginary part is zero by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorCoefficientTable {
    t: f64,
    n_max: usize,
    /// values[n] = τ_{iT}(n); values[0] is unused and 0.
    values: Vec<f64>,
}

impl DivisorCoefficientTable {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// τ_{iT}(n) for 1 ≤ n ≤ n_max.
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.n_max);
        self.values[n]
    }

    /// Entries 1..=n_max.
    pub fn as_slice(&self) -> &[f64] {
        &self.values[1..]
    }

    const MAGIC: &'static [u8; 8] = b"EISTAU\0\0";
    const VERSION: u32 = 1;

    /// Writes a binary cache: magic, format version, T, n_max, then the
    /// entries as little-endian f64.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(Self::MAGIC)?;
        out.write_all(&Self::VERSION.to_le_bytes())?;
        out.write_all(&self.t.to_le_bytes())?;
        out.write_all(&(self.n_max as u64).to_le_bytes())?;
        for v in &self.values[1..] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a cache written by [`Self::save`]; the key (T, n_max) must match.
    pub fn load(path: &Path, t: f64, n_max: usize) -> Result<Self> {
        let mut inp = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        inp.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::Parse(format!("{}: not a tau cache", path.display())));
        }
        let mut b4 = [0u8; 4];
        inp.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != Self::VERSION {
            return Err(Error::Parse(format!(
                "tau cache version {version}, expected {}",
                Self::VERSION
            )));
        }
        let mut b8 = [0u8; 8];
        inp.read_exact(&mut b8)?;
        let t_file = f64::from_le_bytes(b8);
        inp.read_exact(&mut b8)?;
        let n_file = u64::from_le_bytes(b8) as usize;
        if t_file.to_bits() != t.to_bits() || n_file != n_max {
            return Err(Error::Parse(format!(
                "tau cache key (T={t_file}, n_max={n_file}) does not match (T={t}, n_max={n_max})"
            )));
        }
        let mut values = vec![0.0; n_max + 1];
        for v in values.iter_mut().skip(1) {
            inp.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        Ok(Self { t, n_max, values })
    }

    /// Loads the cache at `path` if it holds this key, otherwise builds the
    /// table and (re)writes the cache.
    pub fn cached(path: &Path, t: f64, n_max: usize, exec: Exec) -> Result<Self> {
        match Self::load(path, t, n_max) {
            Ok(table) => Ok(table),
            Err(_) => {
                let table = build_tau_table_with(t, n_max, exec)?;
                table.save(path)?;
                Ok(table)
            }
        }
    }
}

/// Sieve construction of τ_{iT}(n), n ≤ n_max.
pub fn build_tau_table(t: f64, n_max: usize) -> Result<DivisorCoefficientTable> {
    build_tau_table_with(t, n_max, Exec::default())
}

/// As [`build_tau_table`] with an explicit execution mode. The result is
/// bit-identical across modes: each entry accumulates its divisor pairs in
/// increasing order of the smaller divisor regardless of chunking.
pub fn build_tau_table_with(t: f64, n_max: usize, exec: Exec) -> Result<DivisorCoefficientTable> {
    if n_max < 1 {
        return Err(Error::domain("tau table needs n_max >= 1"));
    }
    if n_max > TAU_TABLE_GUARD {
        return Err(Error::Capacity {
            what: "tau table",
            requested: n_max as u64,
            limit: TAU_TABLE_GUARD as u64,
        });
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("tau table needs finite T, got {t}")));
    }
    // Phase accuracy: T·(ln a − ln b) with correctly rounded logs carries an
    // absolute error ≤ T·ε·(|ln a| + |ln b| + |ln a − ln b|) ≤ 3εT ln n_max,
    // e.g. 2·10⁻¹¹ at T = 2000, n_max = 10⁶.
    let root = isqrt(n_max);
    let ln_small: Vec<f64> = (0..=root)
        .map(|a| if a == 0 { 0.0 } else { (a as f64).ln() })
        .collect();

    let chunks = n_max.div_ceil(CHUNK);
    let parts = map_indexed(exec, chunks, |c| {
        let lo = 1 + c * CHUNK;
        let hi = (lo + CHUNK - 1).min(n_max);
        let mut part = vec![0.0; hi - lo + 1];
        #[allow(clippy::needless_range_loop)] // a is the divisor itself, not just an index
        for a in 1..=isqrt(hi) {
            let ln_a = ln_small[a];
            // b ≥ a with lo ≤ ab ≤ hi
            let b_start = a.max(lo.div_ceil(a));
            let b_end = hi / a;
            for b in b_start..=b_end {
                let n = a * b;
                let contrib = if a == b {
                    1.0
                } else {
                    2.0 * (t * (ln_a - (b as f64).ln())).cos()
                };
                part[n - lo] += contrib;
            }
        }
        part
    });
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(0.0);
    for part in parts {
        values.extend(part);
    }
    Ok(DivisorCoefficientTable { t, n_max, values })
}

/// ⌊√n⌋ exactly.
pub fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Positive divisors of n in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// σ_{−1}(m) = Σ_{d | |m|} 1/d.
pub fn sigma_minus_one(m: i64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("sigma_minus_one(0) is undefined"));
    }
    let mut acc = KahanSum::new();
    for d in divisors(m.unsigned_abs()) {
        acc.add(1.0 / d as f64);
    }
    Ok(acc.value())
}

/// τ_{iT}(n) by direct enumeration of divisor pairs; the oracle for the sieve.
pub fn tau_direct(t: f64, n: u64) -> f64 {
    let mut acc = KahanSum::new();
    for a in divisors(n) {
        let b = n / a;
        acc.add((t * ((a as f64).ln() - (b as f64).ln())).cos());
    }
    acc.value()
}

/// Outcome of [`check_z_identity`].
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ZIdentityCheck {
    pub truncated: Complex64,
    pub exact: Complex64,
    /// |truncated − exact|
    pub residual: f64,
    /// Rigorous upper bound for Σ_{n>N} d(n)²/n^σ.
    pub tail_bound: f64,
}

impl ZIdentityCheck {
    /// The residual must not exceed twice the tail bound.
    pub fn passes(&self) -> bool {
        self.residual <= 2.0 * self.tail_bound
    }
}

/// Compares Σ_{n≤N} τ_{iT}(n)² n^{-s} with ζ(s−2iT)ζ(s+2iT)ζ(s)²/ζ(2s).
pub fn check_z_identity(t: f64, s: Complex64, n_trunc: usize) -> Result<ZIdentityCheck> {
    if s.re < 2.0 {
        return Err(Error::Convergence(format!(
            "Z-identity check needs Re s >= 2 for a controlled tail, got {}",
            s.re
        )));
    }
    if n_trunc < 1000 {
        return Err(Error::domain(format!(
            "Z-identity check needs n_trunc >= 1000, got {n_trunc}"
        )));
    }
    let table = build_tau_table(t, n_trunc)?;
    let mut acc = ComplexKahanSum::new();
    // summed from the small end last, so the large terms absorb the small ones
    for n in (1..=n_trunc).rev() {
        let tau = table.get(n);
        acc.add((-s * (n as f64).ln()).exp() * (tau * tau));
    }
    let truncated = acc.value();
    let two_it = Complex64::new(0.0, 2.0 * t);
    let zs = zeta(s)?;
    let exact = zeta(s - two_it)? * zeta(s + two_it)? * zs * zs / zeta(2.0 * s)?;
    Ok(ZIdentityCheck {
        truncated,
        exact,
        residual: (truncated - exact).norm(),
        tail_bound: divisor_square_tail(s.re, n_trunc as f64),
    })
}

/// Upper bound for Σ_{n>N} d(n)² n^{-σ}, σ > 1.
///
/// With S(x) = Σ_{n≤x} d(n)² ≤ x(1 + log x)³, partial summation gives
/// tail ≤ σ ∫_N^∞ (1 + log x)³ x^{-σ} dx
///      = σ N^{1-σ} Σ_{j=0}^{3} 3!/(3−j)! (1 + log N)^{3−j} / (σ−1)^{j+1}.
pub fn divisor_square_tail(sigma: f64, n: f64) -> f64 {
    let k = sigma - 1.0;
    let l = 1.0 + n.ln();
    let falling = [1.0, 3.0, 6.0, 6.0];
    let mut sum = 0.0;
    for (j, f) in falling.iter().enumerate() {
        sum += f * l.powi(3 - j as i32) / k.powi(j as i32 + 1);
    }
    sigma * n.powf(-k) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_entries() {
        let t = 7.3;
        let tab = build_tau_table(t, 100).unwrap();
        assert_eq!(tab.get(1), 1.0);
        assert!((tab.get(2) - 2.0 * (t * 2f64.ln()).cos()).abs() < 1e-15);
        // 12 = 4·3 with gcd 1
        assert!((tab.get(12) - tab.get(4) * tab.get(3)).abs() < 1e-12);
        assert!((tab.get(12) - tau_direct(t, 12)).abs() < 1e-13);
    }

    #[test]
    fn guards() {
        assert!(matches!(build_tau_table(1.0, 0), Err(Error::Domain(_))));
        assert!(matches!(
            build_tau_table(1.0, TAU_TABLE_GUARD + 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma_minus_one(1).unwrap(), 1.0);
        assert!((sigma_minus_one(6).unwrap() - 2.0).abs() < 1e-15);
        assert!((sigma_minus_one(-4).unwrap() - 1.75).abs() < 1e-15);
        assert!(sigma_minus_one(0).is_err());
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(36), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
    }

    #[test]
    fn divisor_square_partial_sums_respect_envelope() {
        // S(x) ≤ x (1 + log x)³ is the input of the tail bound
        let n = 100_000;
        let tab = build_tau_table(0.0, n).unwrap();
        let mut s = 0.0;
        for k in 1..=n {
            s += tab.get(k) * tab.get(k);
            let x = k as f64;
            assert!(s <= x * (1.0 + x.ln()).powi(3), "k={k}");
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("eislab-tau-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tau.bin");
        let tab = build_tau_table(12.5, 5000).unwrap();
        tab.save(&path).unwrap();
        let back = DivisorCoefficientTable::load(&path, 12.5, 5000).unwrap();
        assert_eq!(tab, back);
        assert!(DivisorCoefficientTable::load(&path, 12.5, 5001).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
