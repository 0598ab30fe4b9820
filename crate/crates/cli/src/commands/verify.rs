use fatoulab::baker::{
    annuli, build_radii, gap_density_bound, verify_forward_invariance, verify_growth_markers,
    verify_loglog_ratio, BakerError, KRule, RadiiTable, Verdict, DEFAULT_EXPONENT_CAP,
};
use fatoulab::config::FunctionSpec;
use fatoulab::dynamics::{
    annulus_bands, b_ratios, default_escape_t, detect_components, strong_uniform_failure_witness,
    OrbitParams, Witness,
};
use fatoulab::modulus::EntireFunction;
use fatoulab::scalar::{lift, Real};
use serde_json::{json, Value};

use crate::config::Claim3Table;
use crate::{exit, with_scalar, write_json, CliError, Run};

pub fn verify_baker(run: &Run) -> Result<i32, CliError> {
    let (report, code) = verify_report(run)?;
    write_json(&run.file("verify_baker.json"), &report)?;
    write_json(&run.file("components.json"), &report["claim1"]["components"])?;
    Ok(code)
}

struct Skipped(Vec<Value>);

impl Skipped {
    fn push(&mut self, check: &str, n: usize, e: impl ToString) {
        self.0.push(json!({ "check": check, "n": n, "reason": e.to_string() }));
    }
}

fn all_pass(vs: &[Verdict]) -> bool {
    vs.iter().all(|v| v.pass)
}

/// The report and its exit code: 0 all pass, 1 a check failed, 3 too few
/// radii to check anything.
pub fn verify_report(run: &Run) -> Result<(Value, i32), CliError> {
    if !run.config.function.is_baker() {
        return Err(CliError::config("verify-baker needs a `baker` function"));
    }
    with_scalar!(run.precision, T => verify_with::<T>(run))
}

fn table_json<T: Real>(table: &RadiiTable<T>) -> Value {
    let t: Vec<f64> = table.log_radii().iter().map(|x| x.to_f64()).collect();
    json!({
        "rule": table.rule(),
        "n0_detected": table.n0(),
        "stop": table.stop(),
        "t": t,
        "k": table.exponents(),
    })
}

fn verify_with<T: Real>(run: &Run) -> Result<(Value, i32), CliError> {
    let FunctionSpec::Baker {
        c,
        r1,
        rule,
        n,
        tolerance,
        exponent_cap,
    } = &run.config.function
    else {
        unreachable!("checked by the caller")
    };
    let params = &run.config.verify;
    let built = run
        .config
        .function
        .build::<T>()
        .map_err(|e| CliError::config(e.to_string()))?;
    let table = built.table.expect("a product carries its table");
    let f = &built.function;
    let lambda = rule.lambda();
    let mut insufficient: Vec<String> = Vec::new();
    let mut skipped = Skipped(Vec::new());

    let ln2 = T::ln2();
    let mut doubling = Vec::new();
    match table.n0() {
        None => insufficient.push("no index past which the radii double".into()),
        Some(n0) => {
            for m in n0..table.len() {
                let margin = (table.t(m + 1).unwrap() - table.t(m).unwrap() - ln2).to_f64();
                doubling.push(Verdict {
                    check: "doubling".into(),
                    n: m,
                    pass: margin > 0.0,
                    margins: vec![margin],
                });
            }
        }
    }

    let mut invariance = Vec::new();
    for a in annuli(&table).a {
        match verify_forward_invariance(f, &table, a.n) {
            Ok(v) => invariance.push(v),
            Err(e) => skipped.push("forward_invariance", a.n, e),
        }
    }
    if invariance.is_empty() {
        insufficient.push("no annulus A_n with A_{n+1} and t_{n+2} known".into());
    }

    let mut markers = Vec::new();
    for m in 1..=table.exponents().len() {
        match verify_growth_markers(f, &table, m) {
            Ok(v) => markers.push(v),
            Err(e) => skipped.push("growth_markers", m, e),
        }
    }

    let mut loglog = Vec::new();
    if let Some(l) = lambda {
        for m in 2..table.len() {
            if let Ok((v, value)) = verify_loglog_ratio(&table, m, l) {
                loglog.push(json!({ "verdict": v, "value": value, "bound": 2.0 * l + 1.0 }));
            }
        }
    }
    let loglog_pass = loglog.iter().all(|v| v["verdict"]["pass"] == json!(true));

    let escape_t = params.escape_t.or_else(|| default_escape_t(&table)).unwrap_or(f64::INFINITY);
    let orbit = OrbitParams::new(params.max_steps, escape_t).with_bands(annulus_bands(&table));
    let (components, ratios, b2_pass, witness) =
        match detect_components(f, &table, params.refine_iters, &orbit) {
            Ok(comps) => {
                let r = b_ratios(&comps);
                let bound = lambda.map(|l| 6.0 * (2.0 * l + 1.0));
                let b2 = r.map(|r| r.b2);
                let b2_pass = match (b2, bound) {
                    (Some(v), Some(b)) => v <= b,
                    _ => true,
                };
                let w = strong_uniform_failure_witness(&comps, params.m_target);
                (
                    json!(comps),
                    json!({ "partial": r, "b2_bound": bound, "b2_pass": b2_pass }),
                    b2_pass,
                    w,
                )
            }
            Err(e) => {
                insufficient.push(format!("components: {e}"));
                (
                    json!([]),
                    Value::Null,
                    false,
                    strong_uniform_failure_witness(&[], params.m_target),
                )
            }
        };
    let witness_pass = matches!(witness, Witness::Found { .. });

    let claim1_pass = all_pass(&doubling) && all_pass(&invariance) && all_pass(&markers) && loglog_pass && b2_pass;
    let cap = exponent_cap.unwrap_or(DEFAULT_EXPONENT_CAP);
    let (claim3, claim3_pass) = claim3::<T>(run, *c, *r1, rule, *n, *tolerance, cap, &table, f)?;

    let pass = claim1_pass && witness_pass && claim3_pass;
    let code = if !insufficient.is_empty() {
        exit::TRUNCATED
    } else if pass {
        exit::OK
    } else {
        exit::FAIL
    };
    let report = json!({
        "command": "verify-baker",
        "config": run.config.resolved(run.bits),
        "working_bits": run.precision.bits(),
        "table": table_json(&table),
        "escape_t": escape_t,
        "claim1": {
            "doubling": doubling,
            "forward_invariance": invariance,
            "growth_markers": markers,
            "loglog_ratio": loglog,
            "components": components,
            "b_ratios": ratios,
            "pass": claim1_pass,
        },
        "claim2": {
            "m_target": params.m_target,
            "witness": witness,
            "pass": witness_pass,
        },
        "claim3": claim3,
        "skipped": skipped.0,
        "insufficient": insufficient,
        "pass": pass,
        "exit_code": code,
    });
    Ok((report, code))
}

#[allow(clippy::too_many_arguments)]
fn claim3<T: Real>(
    run: &Run,
    c: f64,
    r1: f64,
    rule: &KRule,
    n: usize,
    tolerance: f64,
    cap: u64,
    table: &RadiiTable<T>,
    f: &EntireFunction<T>,
) -> Result<(Value, bool), CliError> {
    let params = &run.config.verify;
    let odd;
    let (t3, f3): (&RadiiTable<T>, EntireFunction<T>) = match (params.claim3_table, rule) {
        (Claim3Table::Skip, _) => return Ok((json!({ "skipped": true, "pass": true }), true)),
        (Claim3Table::Auto, KRule::Lambda { lambda }) => {
            odd = build_radii::<T>(c, r1, &KRule::LambdaOdd { lambda: *lambda }, n, cap)
                .map_err(|e| CliError::config(e.to_string()))?;
            let g = odd
                .to_product(lift(tolerance))
                .map_err(|e| CliError::config(e.to_string()))?;
            (&odd, g.into())
        }
        _ => (table, f.clone()),
    };
    let bound = 0.5 + params.density_slack;
    Ok(match gap_density_bound(&f3, t3, params.gap_samples) {
        Ok(r) => {
            let pass = r.density.value <= bound && all_pass(&r.ratio_checks);
            (
                json!({ "table": table_json(t3), "report": r, "bound_with_slack": bound, "pass": pass }),
                pass,
            )
        }
        Err(e) => {
            let kind = match e {
                BakerError::EvenExponent { .. } => "EvenExponent",
                _ => "Error",
            };
            (
                json!({ "table": table_json(t3), "error": kind, "message": e.to_string(), "pass": false }),
                false,
            )
        }
    })
}
