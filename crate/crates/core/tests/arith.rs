use num_complex::Complex64;
use proptest::prelude::*;

use eislab::arith::{
    build_tau_table, build_tau_table_with, check_z_identity, divisors, sigma_minus_one, tau_direct,
    TAU_TABLE_GUARD,
};
use eislab::par::Exec;
use eislab::Error;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn twelve_factors_through_coprime_parts() {
    let t = 37.25;
    let table = build_tau_table(t, 20).unwrap();
    // all six divisor pairs of 12, enumerated by hand
    let pairs = [
        (1.0, 12.0),
        (2.0, 6.0),
        (3.0, 4.0),
        (4.0, 3.0),
        (6.0, 2.0),
        (12.0, 1.0),
    ];
    let brute: f64 = pairs
        .iter()
        .map(|(a, b): &(f64, f64)| (t * (a / b).ln()).cos())
        .sum();
    assert!((table.get(12) - brute).abs() < 1e-12);
    assert!((table.get(12) - table.get(4) * table.get(3)).abs() < 1e-12);
    assert_eq!(table.get(1), 1.0);
    assert!((table.get(2) - 2.0 * (t * 2f64.ln()).cos()).abs() < 1e-14);
}

#[test]
fn z_identity_examples() {
    let z = check_z_identity(5.0, Complex64::new(3.0, 0.0), 100_000).unwrap();
    assert!(
        z.residual <= z.tail_bound,
        "{} > {}",
        z.residual,
        z.tail_bound
    );
    let z = check_z_identity(0.0, Complex64::new(4.0, 0.0), 1000).unwrap();
    assert!(z.residual <= 1e-6);
    let z = check_z_identity(20.0, Complex64::new(2.5, 0.0), 1_000_000).unwrap();
    assert!(z.passes(), "{} vs 2 x {}", z.residual, z.tail_bound);
}

#[test]
fn z_identity_preconditions() {
    assert!(matches!(
        check_z_identity(5.0, Complex64::new(1.5, 0.0), 10_000),
        Err(Error::Convergence(_))
    ));
    assert!(check_z_identity(5.0, Complex64::new(3.0, 0.0), 999).is_err());
}

#[test]
fn guard_and_sigma_domain() {
    assert!(matches!(
        build_tau_table(1.0, TAU_TABLE_GUARD + 1),
        Err(Error::Capacity { .. })
    ));
    assert!(build_tau_table(1.0, 0).is_err());
    assert!(matches!(sigma_minus_one(0), Err(Error::Domain(_))));
    assert_eq!(sigma_minus_one(1).unwrap(), 1.0);
}

#[test]
fn parallel_build_is_bit_identical() {
    let a = build_tau_table_with(812.5, 200_000, Exec::Sequential).unwrap();
    let b = build_tau_table_with(812.5, 200_000, Exec::Parallel).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplicative_on_coprime_pairs(t in 0.0f64..2000.0, m in 1u64..300, n in 1u64..300) {
        prop_assume!(gcd(m, n) == 1);
        let table = build_tau_table(t, (m * n) as usize).unwrap();
        let lhs = table.get((m * n) as usize);
        let rhs = table.get(m as usize) * table.get(n as usize);
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn bounded_by_divisor_count(t in 0.0f64..5000.0, n in 1u64..5000) {
        let v = tau_direct(t, n);
        prop_assert!(v.abs() <= divisors(n).len() as f64 + 1e-12);
    }

    #[test]
    fn sieve_matches_direct_sum(t in 0.0f64..3000.0, n in 1u64..20_000) {
        let table = build_tau_table(t, n as usize).unwrap();
        prop_assert!((table.get(n as usize) - tau_direct(t, n)).abs() <= 1e-10);
    }

    #[test]
    fn sigma_is_sum_of_reciprocal_divisors(m in 1i64..100_000) {
        let want: f64 = divisors(m as u64).iter().map(|&d| 1.0 / d as f64).sum();
        prop_assert!((sigma_minus_one(m).unwrap() - want).abs() <= 1e-12);
        prop_assert_eq!(sigma_minus_one(m).unwrap(), sigma_minus_one(-m).unwrap());
    }
}
