use serde::Serialize;

use eislab::corr::{correlation_reports, windows_experiment, CorrelationReport, WindowRow};
use eislab::eisen::{
    build_series_with, count_sign_changes_with, CountOptions, SeriesOptions, DEFAULT_WINDOW,
};
use eislab::golden::{ensure_present, resolve_dir};
use eislab::par::Exec;
use eislab::scs::{scs_sweep, ScsReport};
use eislab::selftest::{run_all, run_suite, SuiteReport, SUITES};
use eislab::testfn::BumpFunction;

use crate::output::{emit, float, to_json};
use crate::{Cli, Command, Failure, Format};

/// Correlation routes must agree to this relative level.
const ROUTE_TOLERANCE: f64 = 1e-6;
/// Empirical envelope for |brute − main term| / et_bound.
const SCS_ENVELOPE: f64 = 10.0;

pub fn run(cli: &Cli, exec: Exec) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    let write = |json: String, csv: String| -> Result<(), Failure> {
        let text = match cli.format {
            Format::Json => json,
            Format::Csv => csv,
        };
        Ok(emit(out, &text)?)
    };
    match &cli.command {
        Command::Eval {
            t,
            window,
            points,
            y,
        } => {
            let report = eval(*t, *window, *points, y, exec)?;
            write(to_json(&report)?, report.csv())
        }
        Command::Signchanges { t, window } => {
            let (a, b) = *window;
            let hull = (a.min(DEFAULT_WINDOW.0), b.max(DEFAULT_WINDOW.1));
            let series = build_series_with(*t, hull, SeriesOptions { n_max: None, exec })?;
            let r = count_sign_changes_with(
                &series,
                a,
                b,
                CountOptions {
                    exec,
                    ..CountOptions::default()
                },
            )?;
            if !r.near_zero_points.is_empty() {
                log::warn!(
                    "{} grid points below the noise threshold",
                    r.near_zero_points.len()
                );
            }
            let csv = format!(
                "T,a,b,count,grid_points,min_gap,grid_stable\n{},{},{},{},{},{},{}\n",
                r.t,
                a,
                b,
                r.count,
                r.grid_points,
                float(r.min_gap),
                r.grid_stable
            );
            write(to_json(&r)?, csv)
        }
        Command::Correlation {
            t,
            alpha,
            center,
            width,
            direct_only,
        } => {
            let psi = BumpFunction::new(*center, *width)?;
            let reports = correlation_reports(*t, alpha, &psi, !direct_only, exec)?;
            let json = if reports.len() == 1 {
                to_json(&reports[0])?
            } else {
                to_json(&reports)?
            };
            write(
                json,
                csv_table(
                    CorrelationReport::CSV_HEADER,
                    reports.iter().map(|r| r.csv_row()),
                ),
            )?;
            for r in &reports {
                if let Some(gap) = r.route_gap {
                    if gap > ROUTE_TOLERANCE * r.i_direct.abs().max(1.0) {
                        return Err(Failure::Invariant(format!(
                            "routes differ by {gap:.3e} at alpha={}",
                            r.alpha
                        )));
                    }
                }
            }
            Ok(())
        }
        Command::Windows { t, delta, alpha } => {
            if !(*delta > 0.0 && *delta < 1.0 / 51.0) {
                return Err(Failure::Config(format!(
                    "--delta must lie in (0, 1/51), got {delta}"
                )));
            }
            let rows = windows_experiment(*t, *delta, *alpha, exec)?;
            write(
                to_json(&rows)?,
                csv_table(WindowRow::CSV_HEADER, rows.iter().map(|r| r.csv_row())),
            )?;
            match rows.iter().find(|r| !r.consistent()) {
                Some(r) => Err(Failure::Invariant(format!(
                    "window {} has I < 0 but no sign change was located",
                    r.j
                ))),
                None => Ok(()),
            }
        }
        Command::Scs { t, y, p, m, big_m } => {
            let ms: Vec<i64> = if m.is_empty() {
                if *big_m < 1 {
                    return Err(Failure::Config(format!(
                        "--M must be at least 1, got {big_m}"
                    )));
                }
                (1..=*big_m).flat_map(|k| [k, -k]).collect()
            } else {
                m.clone()
            };
            let sweep = scs_sweep(*t, *y, *p, &ms, exec)?;
            write(to_json(&sweep)?, sweep.to_csv())?;
            let worst = sweep
                .rows
                .iter()
                .map(|r: &ScsReport| r.ratio)
                .fold(0.0, f64::max);
            if worst > SCS_ENVELOPE || sweep.total_error > SCS_ENVELOPE * sweep.summed_bound {
                return Err(Failure::Invariant(format!(
                    "error exceeds {SCS_ENVELOPE} x bound (worst ratio {worst:.3e})"
                )));
            }
            Ok(())
        }
        Command::Selftest { suite } => {
            let dir = resolve_dir(cli.golden.as_deref());
            ensure_present(&dir)?;
            let reports = match suite {
                Some(name) if SUITES.contains(&name.as_str()) => vec![run_suite(name, &dir, exec)],
                Some(name) => {
                    return Err(Failure::Config(format!(
                        "unknown suite '{name}' (available: {})",
                        SUITES.join(", ")
                    )))
                }
                None => run_all(&dir, exec),
            };
            for r in &reports {
                eprintln!(
                    "{:<8} {} {:>3} checks {:>7.2} s{}",
                    r.suite,
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.checks.len(),
                    r.seconds,
                    r.error
                        .as_ref()
                        .map(|e| format!("  ({e})"))
                        .unwrap_or_default()
                );
                for c in r.failures() {
                    eprintln!("    {}: {:.3e} > {:.3e}", c.name, c.value, c.tolerance);
                }
            }
            write(to_json(&reports)?, selftest_csv(&reports))?;
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.suite.as_str())
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Invariant(format!(
                    "suites failed: {}",
                    failed.join(", ")
                )))
            }
        }
    }
}

fn csv_table(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn selftest_csv(reports: &[SuiteReport]) -> String {
    let rows = reports.iter().flat_map(|r| {
        r.checks.iter().map(move |c| {
            format!(
                "{},{:?},{},{},{}",
                r.suite,
                c.name,
                float(c.value),
                float(c.tolerance),
                c.passed
            )
        })
    });
    csv_table("suite,check,value,tolerance,passed", rows)
}

#[derive(Serialize)]
struct EvalPoint {
    y: f64,
    value: f64,
    error_bound: f64,
}

#[derive(Serialize)]
struct EvalReport {
    #[serde(rename = "T")]
    t: f64,
    window: [f64; 2],
    n_max: usize,
    tail_bound: f64,
    points: Vec<EvalPoint>,
}

impl EvalReport {
    fn csv(&self) -> String {
        csv_table(
            "y,value,error_bound",
            self.points
                .iter()
                .map(|p| format!("{},{},{}", float(p.y), float(p.value), float(p.error_bound))),
        )
    }
}

fn eval(
    t: f64,
    window: (f64, f64),
    points: usize,
    ys: &[f64],
    exec: Exec,
) -> Result<EvalReport, Failure> {
    let series = build_series_with(t, window, SeriesOptions { n_max: None, exec })?;
    let ys: Vec<f64> = if ys.is_empty() {
        if points < 2 {
            return Err(Failure::Config(format!(
                "--points must be at least 2, got {points}"
            )));
        }
        let (la, lb) = (window.0.ln(), window.1.ln());
        (0..points)
            .map(|k| (la + (lb - la) * k as f64 / (points - 1) as f64).exp())
            .map(|y: f64| y.clamp(window.0, window.1))
            .collect()
    } else {
        ys.to_vec()
    };
    let values = series.eval_grid(&ys, exec)?;
    let bound = series.error_bound();
    Ok(EvalReport {
        t,
        window: [window.0, window.1],
        n_max: series.n_max,
        tail_bound: series.tail_bound,
        points: ys
            .iter()
            .zip(values)
            .map(|(&y, value)| EvalPoint {
                y,
                value,
                error_bound: bound,
            })
            .collect(),
    })
}
