use std::fs;
use std::path::{Path, PathBuf};

use eislab::golden::{bundled_dir, ensure_present, load_kernel_points, KERNEL_FILE, MISC_FILE};
use eislab::par::Exec;
use eislab::selftest::{run_all, run_suite, SUITES};
use eislab::Error;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eislab-selftest-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn copy_golden(to: &Path) {
    for f in [KERNEL_FILE, MISC_FILE] {
        fs::copy(bundled_dir().join(f), to.join(f)).unwrap();
    }
}

#[test]
fn every_suite_passes_on_bundled_data() {
    let reports = run_all(&bundled_dir(), Exec::default());
    assert_eq!(reports.len(), SUITES.len());
    for r in &reports {
        let failures: Vec<_> = r
            .failures()
            .map(|c| (&c.name, c.value, c.tolerance))
            .collect();
        assert!(r.passed(), "{}: {:?} {failures:?}", r.suite, r.error);
        assert!(!r.checks.is_empty());
    }
}

#[test]
fn corrupted_kernel_row_fails_the_specfun_suite() {
    let dir = scratch("corrupt");
    copy_golden(&dir);
    let path = dir.join(KERNEL_FILE);
    let text = fs::read_to_string(&path).unwrap();
    // perturb the 7th digit of the third row's value
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[3].split(',').map(String::from).collect();
    let v: f64 = fields[2].parse().unwrap();
    fields[2] = format!("{:.17e}", v * (1.0 + 1e-6));
    lines[3] = fields.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let r = run_suite("specfun", &dir, Exec::default());
    assert!(!r.passed());
    assert_eq!(r.suite, "specfun");
    assert!(r.failures().any(|c| c.name.starts_with("kernel T=1 y=3")));
    // unrelated suites are unaffected
    assert!(run_suite("arith", &dir, Exec::default()).passed());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unparseable_row_is_named() {
    let dir = scratch("garbage");
    copy_golden(&dir);
    let path = dir.join(KERNEL_FILE);
    let text =
        fs::read_to_string(&path)
            .unwrap()
            .replacen("0.42102443824070833", "zero point four", 1);
    fs::write(&path, text).unwrap();
    match load_kernel_points(&dir) {
        Err(Error::Parse(msg)) => assert!(msg.contains("row 1"), "{msg}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let r = run_suite("specfun", &dir, Exec::default());
    assert!(!r.passed() && r.error.is_some());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_file_is_an_explicit_error() {
    let dir = scratch("missing");
    fs::copy(bundled_dir().join(MISC_FILE), dir.join(MISC_FILE)).unwrap();
    assert!(matches!(ensure_present(&dir), Err(Error::MissingData(_))));
    let r = run_suite("specfun", &dir, Exec::default());
    assert!(r.error.unwrap().contains(KERNEL_FILE));
    fs::remove_dir_all(&dir).unwrap();
}
