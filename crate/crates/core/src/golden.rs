//! Reference values produced once by the high-precision oracle scripts in
//! `oracle/` and committed under `data/`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

/// Environment variable overriding the golden-data directory.
pub const GOLDEN_ENV: &str = "EISLAB_GOLDEN";
pub const KERNEL_FILE: &str = "golden_bessel_k.csv";
pub const MISC_FILE: &str = "golden_misc.json";

/// The directory shipped with the crate.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Explicit path, then `$EISLAB_GOLDEN`, then the bundled directory.
pub fn resolve_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(GOLDEN_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => bundled_dir(),
    }
}

/// One certified spot value of e^{πT/2}K_{iT}(y).
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct KernelPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub y: f64,
    pub scaled_k: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ConstantsPoint {
    pub ln_theta_re: f64,
    pub mu_re: f64,
    pub mu_im: f64,
    pub ln_rho_star_1: f64,
    pub rho_star_1_scaled: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct SeriesPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct BinomialPoint {
    pub z: f64,
    pub u_im: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub residual: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct MiscValues {
    pub ln_gamma_half_plus_50i: [f64; 2],
    pub zeta_half_plus_100i: [f64; 2],
    pub zeta_1_plus_200i: [f64; 2],
    /// keyed by T as written by the oracle ("10", "100", ...)
    pub eisenstein: BTreeMap<String, ConstantsPoint>,
    /// J₀ keyed by its argument
    pub j0: BTreeMap<String, f64>,
    pub eisenstein_values: Vec<SeriesPoint>,
    pub binomial_residual: BinomialPoint,
}

fn missing(path: &Path) -> Error {
    Error::MissingData(format!("golden file {} not found", path.display()))
}

/// Checks that both golden files exist under `dir`.
pub fn ensure_present(dir: &Path) -> Result<()> {
    for f in [KERNEL_FILE, MISC_FILE] {
        let p = dir.join(f);
        if !p.is_file() {
            return Err(missing(&p));
        }
    }
    Ok(())
}

pub fn load_kernel_points(dir: &Path) -> Result<Vec<KernelPoint>> {
    let path = dir.join(KERNEL_FILE);
    if !path.is_file() {
        return Err(missing(&path));
    }
    let mut rdr = csv::Reader::from_path(&path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<KernelPoint>().enumerate() {
        let p = row.map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), i + 1)))?;
        if !(p.t.is_finite() && p.y.is_finite() && p.scaled_k.is_finite()) {
            return Err(Error::Parse(format!(
                "{} row {}: non-finite value",
                path.display(),
                i + 1
            )));
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("{}: no rows", path.display())));
    }
    Ok(out)
}

pub fn load_misc(dir: &Path) -> Result<MiscValues> {
    let path = dir.join(MISC_FILE);
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => missing(&path),
        _ => Error::Io(e),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_load() {
        let dir = bundled_dir();
        assert_eq!(load_kernel_points(&dir).unwrap().len(), 20);
        let misc = load_misc(&dir).unwrap();
        assert!(misc.eisenstein.contains_key("100"));
        assert_eq!(misc.eisenstein_values.len(), 3);
    }

    #[test]
    fn missing_directory_is_reported() {
        let dir = Path::new("/nonexistent/golden");
        assert!(matches!(ensure_present(dir), Err(Error::MissingData(_))));
        assert!(matches!(
            load_kernel_points(dir),
            Err(Error::MissingData(_))
        ));
        assert!(matches!(load_misc(dir), Err(Error::MissingData(_))));
    }
}
