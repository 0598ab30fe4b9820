use fatoulab::growth::{
    delta_membership, estimate_order, fabry_gap_check, growth_condition_check, hadamard_convexity_check,
    hua_yang_sequence, order_gap_sequence, spike_finder, GrowthError, OpRecord,
};
use fatoulab::modulus::{modulus_curve, EntireFunction, UniformGrid};
use fatoulab::scalar::{lift, Real};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Check, GridSpec};
use crate::{exit, with_scalar, write_file, write_json, CliError, Run};

#[derive(Serialize)]
struct Entry {
    #[serde(flatten)]
    record: OpRecord,
    detail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl Entry {
    fn failed(check: &Check, e: GrowthError) -> Result<Entry, CliError> {
        if let GrowthError::Precondition(why) = &e {
            return Err(CliError::config(format!("{}: {why}", check.name())));
        }
        let margin = match e {
            GrowthError::NotFound { best_margin } => Some(best_margin),
            _ => None,
        };
        Ok(Entry {
            record: record(check, false, margin, None),
            detail: Value::Null,
            error: Some(e.to_string()),
        })
    }
}

fn record(check: &Check, pass: bool, margin: Option<f64>, window: Option<(f64, f64)>) -> OpRecord {
    OpRecord {
        op: check.name().into(),
        params: serde_json::to_value(check).expect("check serializes"),
        pass,
        margin,
        window,
    }
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("report serializes")
}

fn grid_window(g: &GridSpec) -> Option<(f64, f64)> {
    Some((g.t_min, g.t_max))
}

pub fn analyze(run: &Run) -> Result<i32, CliError> {
    let (report, code) = analyze_report(run)?;
    write_json(&run.file("analyze.json"), &report)?;
    Ok(code)
}

/// The report and its exit code, without touching the output directory
/// beyond plot data.
pub fn analyze_report(run: &Run) -> Result<(Value, i32), CliError> {
    if run.config.analysis.is_empty() {
        return Err(CliError::config("no [[analysis]] checks selected"));
    }
    with_scalar!(run.precision, T => analyze_with::<T>(run))
}

fn analyze_with<T: Real>(run: &Run) -> Result<(Value, i32), CliError> {
    let built = run
        .config
        .function
        .build::<T>()
        .map_err(|e| CliError::config(e.to_string()))?;
    let f = &built.function;
    let mut entries = Vec::new();
    for check in &run.config.analysis {
        let entry = match run_check(run, f, check)? {
            Ok(e) => e,
            Err(e) => Entry::failed(check, e)?,
        };
        entries.push(entry);
    }
    let pass = entries.iter().all(|e| e.record.pass);
    let report = json!({
        "command": "analyze",
        "config": run.config.resolved(run.bits),
        "working_bits": run.precision.bits(),
        "pass": pass,
        "records": to_value(&entries),
    });
    Ok((report, if pass { exit::OK } else { exit::FAIL }))
}

type CheckResult = Result<Entry, GrowthError>;

fn run_check<T: Real>(run: &Run, f: &EntireFunction<T>, check: &Check) -> Result<CheckResult, CliError> {
    let ok = |pass, margin, window, detail| {
        Ok(Entry {
            record: record(check, pass, margin, window),
            detail,
            error: None,
        })
    };
    Ok(match check {
        Check::Order {
            grid,
            expect,
            tolerance,
        } => {
            grid.validate()?;
            estimate_order(f, &grid.points()).and_then(|est| {
                let margin = expect.map(|e| tolerance - (est.lambda_hat - e).abs());
                ok(margin.is_none_or(|m| m >= 0.0), margin, Some(est.window), to_value(&est))
            })
        }
        Check::Delta {
            eps1,
            eps2,
            grid,
            windows,
        } => {
            grid.validate()?;
            let g = UniformGrid::new(grid.t_min, grid.t_max, grid.count);
            delta_membership(f, *eps1, *eps2, &g, windows.as_deref()).and_then(|v| {
                ok(
                    v.consistent,
                    Some(eps1 - v.density.value),
                    grid_window(grid),
                    to_value(&v),
                )
            })
        }
        Check::GrowthCondition { condition, grid } => {
            grid.validate()?;
            growth_condition_check(f, *condition, &grid.points())
                .and_then(|r| ok(r.first_failure.is_none(), None, grid_window(grid), to_value(&r)))
        }
        Check::Spike { t, h, search_grid } => spike_finder(f, lift::<T>(*t), *h, *search_grid)
            .and_then(|s| ok(true, Some(s.margin), Some((*t, h * t)), to_value(&s))),
        Check::Hadamard { grid, tolerance } => {
            grid.validate()?;
            let ts: Vec<T> = grid.points().into_iter().map(lift).collect();
            let n = ts.len();
            let triples: Vec<(usize, usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k))))
                .collect();
            let defects: Result<Vec<f64>, GrowthError> = triples
                .par_iter()
                .map(|&(i, j, k)| hadamard_convexity_check(f, ts[i], ts[j], ts[k]))
                .collect();
            defects.and_then(|d| {
                let (worst, min) = d
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
                let detail = json!({
                    "triples": d.len(),
                    "min_defect": min,
                    "worst": triples.get(worst).map(|&(i, j, k)| [ts[i].to_f64(), ts[j].to_f64(), ts[k].to_f64()]),
                });
                ok(min >= -tolerance, Some(min + tolerance), grid_window(grid), detail)
            })
        }
        Check::HuaYang {
            t_r1,
            steps,
            search_grid,
        } => hua_yang_sequence(f, lift::<T>(*t_r1), *steps, *search_grid).and_then(|s| {
            let margin = s.steps.iter().map(|x| x.margin).fold(f64::INFINITY, f64::min);
            let pass = !s.steps.is_empty() && s.steps.iter().all(|x| x.pass);
            ok(pass, margin.is_finite().then_some(margin), None, to_value(&s))
        }),
        Check::OrderGap {
            a,
            b,
            t_r,
            steps,
            order_grid,
        } => {
            order_grid.validate()?;
            estimate_order(f, &order_grid.points())
                .and_then(|est| order_gap_sequence(f, &est, *a, *b, lift::<T>(*t_r), *steps))
                .and_then(|s| {
                    let margin = s.steps.iter().map(|x| x.margin).fold(f64::INFINITY, f64::min);
                    let pass = !s.steps.is_empty() && s.steps.iter().all(|x| x.pass);
                    ok(pass, margin.is_finite().then_some(margin), None, to_value(&s))
                })
        }
        Check::Fabry { threshold } => {
            let s = run
                .config
                .function
                .series::<T>()
                .map_err(|e| CliError::config(e.to_string()))?;
            fabry_gap_check(&s, *threshold).and_then(|v| ok(v.consistent, None, None, to_value(&v)))
        }
        Check::Curve { grid } => {
            grid.validate()?;
            let ts: Vec<T> = grid.points().into_iter().map(lift).collect();
            match modulus_curve(f, &ts) {
                Ok(curve) => {
                    let mut csv = Vec::new();
                    curve
                        .write_csv(&mut csv)
                        .map_err(|e| CliError::config(e.to_string()))?;
                    write_file(&run.file("modulus_curve.csv"), &csv)?;
                    ok(true, None, grid_window(grid), json!({ "file": "modulus_curve.csv", "samples": ts.len() }))
                }
                Err(e) => Err(e.into()),
            }
        }
    })
}
