use fatoulab::baker::{build_radii, write_table, KRule, StopReason, TableSidecar, DEFAULT_EXPONENT_CAP};
use fatoulab::config::FunctionSpec;
use fatoulab::scalar::Real;

use crate::{exit, with_scalar, write_file, write_json, CliError, Run};

pub fn construct(run: &Run) -> Result<i32, CliError> {
    let FunctionSpec::Baker {
        c,
        r1,
        rule,
        n,
        exponent_cap,
        ..
    } = &run.config.function
    else {
        return Err(CliError::config("construct needs a `baker` function"));
    };
    let cap = exponent_cap.unwrap_or(DEFAULT_EXPONENT_CAP);
    with_scalar!(run.precision, T => construct_with::<T>(run, *c, *r1, rule, *n, cap))
}

fn construct_with<T: Real>(
    run: &Run,
    c: f64,
    r1: f64,
    rule: &KRule,
    n: usize,
    cap: u64,
) -> Result<i32, CliError> {
    let table = build_radii::<T>(c, r1, rule, n, cap).map_err(|e| CliError::config(e.to_string()))?;
    let mut csv = Vec::new();
    write_table(&table, &mut csv).map_err(|e| CliError::config(e.to_string()))?;
    write_file(&run.file("table.csv"), &csv)?;
    let sidecar = TableSidecar::of(&table, run.bits);
    write_json(&run.file("table.json"), &serde_json::to_value(&sidecar).expect("sidecar serializes"))?;
    let n0 = table.n0().map_or("none".to_string(), |n| n.to_string());
    println!(
        "n0_detected={n0} terms={} radii={} stop={}",
        table.exponents().len(),
        table.len(),
        serde_json::to_string(&table.stop()).expect("stop serializes")
    );
    Ok(match table.stop() {
        StopReason::Complete => exit::OK,
        _ => {
            if let Some(e) = table.stop_error() {
                eprintln!("table truncated: {e}");
            }
            exit::TRUNCATED
        }
    })
}
