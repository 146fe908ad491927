use proptest::prelude::*;

use eislab::eisen::{
    build_series, build_series_with, count_sign_changes, count_sign_changes_with, CountOptions,
    EisensteinSeries, SeriesOptions, DEFAULT_WINDOW,
};
use eislab::par::Exec;
use eislab::Error;

fn series(t: f64, window: (f64, f64), n_max: Option<usize>) -> EisensteinSeries {
    build_series_with(
        t,
        window,
        SeriesOptions {
            n_max,
            exec: Exec::default(),
        },
    )
    .unwrap()
}

#[test]
fn automorphy_at_reciprocal_point() {
    let s = series(100.0, (0.8, 1.25), None);
    let d = (s.eval(1.2).unwrap() - s.eval(1.0 / 1.2).unwrap()).abs();
    assert!(d <= 1e-7, "{d}");
}

#[test]
fn doubling_truncation_moves_values_within_tail() {
    let base = series(300.0, DEFAULT_WINDOW, None);
    let doubled = series(300.0, DEFAULT_WINDOW, Some(2 * base.n_max));
    assert!(doubled.tail_bound <= base.tail_bound);
    for k in 0..20 {
        let y = 0.9 + 2.5 * k as f64 / 19.0;
        let gap = (base.eval(y).unwrap() - doubled.eval(y).unwrap()).abs();
        let allowed = 2.0 * base.tail_bound + base.kernel_error_bound + doubled.kernel_error_bound;
        assert!(gap <= allowed, "y={y}: {gap} > {allowed}");
    }
}

#[test]
fn count_at_t200_is_stable_and_large_enough() {
    let s = build_series(200.0, DEFAULT_WINDOW).unwrap();
    let r = count_sign_changes(&s, 1.0, 3.0).unwrap();
    assert!(r.count >= 2);
    assert!(r.grid_stable);
    assert_eq!(r.count, r.zeros.len());
    let doubled = count_sign_changes_with(
        &s,
        1.0,
        3.0,
        CountOptions {
            grid_points: Some(2 * r.grid_points),
            ..CountOptions::default()
        },
    )
    .unwrap();
    assert_eq!(doubled.count, r.count);
}

#[test]
fn zeros_are_ordered_and_bracketed() {
    let s = build_series(150.0, DEFAULT_WINDOW).unwrap();
    let r = count_sign_changes(&s, 1.0, 3.0).unwrap();
    assert!(r.zeros.windows(2).all(|w| w[0] < w[1]));
    for &z in &r.zeros {
        assert!(z > 1.0 && z < 3.0);
        let h = 1e-9 * z;
        let (l, u) = (s.eval(z - h).unwrap(), s.eval(z + h).unwrap());
        assert!(
            l * u <= 0.0 || l.abs().min(u.abs()) < 1e-6,
            "zero {z}: {l} {u}"
        );
    }
    let gaps = r
        .zeros
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    assert_eq!(r.min_gap, gaps);
}

#[test]
fn count_survives_extra_terms() {
    for t in [100.0, 400.0] {
        let base = series(t, DEFAULT_WINDOW, None);
        let more = series(t, DEFAULT_WINDOW, Some(base.n_max + 50));
        assert_eq!(
            count_sign_changes(&base, 1.0, 3.0).unwrap().count,
            count_sign_changes(&more, 1.0, 3.0).unwrap().count
        );
    }
}

#[test]
fn counts_grow_with_t() {
    let counts: Vec<usize> = [100.0, 200.0, 400.0, 800.0]
        .iter()
        .map(|&t| {
            count_sign_changes(&build_series(t, DEFAULT_WINDOW).unwrap(), 1.0, 3.0)
                .unwrap()
                .count
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
}

#[test]
fn report_json_has_documented_keys() {
    let s = build_series(50.0, DEFAULT_WINDOW).unwrap();
    let r = count_sign_changes(&s, 1.0, 3.0).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["T", "interval", "count", "zeros", "grid_points", "min_gap"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn window_and_interval_are_enforced() {
    let s = build_series(50.0, DEFAULT_WINDOW).unwrap();
    assert!(matches!(s.eval(0.5), Err(Error::Window { .. })));
    assert!(matches!(
        count_sign_changes(&s, 0.5, 3.0),
        Err(Error::Window { .. })
    ));
    assert!(build_series(5.0, DEFAULT_WINDOW).is_err());
}

#[test]
fn grid_evaluation_is_schedule_independent() {
    let s = build_series(500.0, DEFAULT_WINDOW).unwrap();
    let ys: Vec<f64> = (0..3000).map(|k| 1.0 + 2.0 * k as f64 / 2999.0).collect();
    let a = s.eval_grid(&ys, Exec::Sequential).unwrap();
    let b = s.eval_grid(&ys, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn automorphy_on_random_points(t in 20.0f64..400.0, y in 1.0f64..3.0) {
        let s = series(t, (1.0 / 3.0, 3.0), None);
        let a = s.eval(y).unwrap();
        let b = s.eval(1.0 / y).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
    }

    #[test]
    fn value_is_constant_plus_oscillatory_part(t in 10.0f64..300.0, y in 0.9f64..3.4) {
        let s = build_series(t, DEFAULT_WINDOW).unwrap();
        let v = s.eval(y).unwrap();
        prop_assert!(v.is_finite());
        prop_assert_eq!(v, s.constant_term(y) + s.nonconstant_term(y));
        prop_assert!(s.constant_term(y).abs() <= 2.0 * y.sqrt() + 1e-12);
    }
}
