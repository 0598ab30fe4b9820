use fatoulab::baker::{annuli, read_table, verify_forward_invariance, write_table, TableSidecar};
use fatoulab::config::FunctionSpec;
use fatoulab::f256;
use fatoulab::modulus::{
    eval_log_modulus, ModulusError, log_modulus_lower_bound, log_modulus_upper_bound, max_modulus, EntireFunction,
};
use fatoulab::scalar::{lift, Real};
use proptest::prelude::*;

fn desk(tolerance: f64) -> FunctionSpec {
    serde_json::from_value(serde_json::json!({
        "kind": "baker", "C": 0.003, "r1": 4.0,
        "rule": {"kind": "lambda", "lambda": 1.0},
        "n": 40, "tolerance": tolerance,
    }))
    .unwrap()
}

fn exp_spec(terms: usize, tolerance: f64) -> FunctionSpec {
    FunctionSpec::Exp { terms, tolerance }
}

#[test]
fn desk_table_survives_csv_round_trip() {
    let table = desk(1e-20).build::<f256>().unwrap().table.unwrap();
    let sidecar = TableSidecar::of(&table, 237);
    let mut buf = Vec::new();
    write_table(&table, &mut buf).unwrap();
    let back = read_table::<f256, _>(buf.as_slice(), &sidecar).unwrap();
    assert_eq!(back.log_radii(), table.log_radii());
    assert_eq!(back.exponents(), table.exponents());
    assert_eq!(back.n0(), table.n0());
    let json = serde_json::to_string(&sidecar).unwrap();
    assert_eq!(serde_json::from_str::<TableSidecar>(&json).unwrap(), sidecar);
}

#[test]
fn desk_maps_first_annuli_forward() {
    let built = desk(1e-20).build::<f256>().unwrap();
    let table = built.table.unwrap();
    let a = annuli(&table);
    assert!(!a.a.is_empty());
    let mut checked = 0;
    for b in a.a.iter().take(4) {
        // the last annuli can lack t_{n+2}
        if let Ok(v) = verify_forward_invariance(&built.function, &table, b.n) {
            assert!(v.pass, "{v:?}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

fn ln_max_exp<T: Real>(tolerance: f64) -> f64 {
    let f = exp_spec(60, tolerance).build::<T>().unwrap().function;
    max_modulus(&f, T::one()).unwrap().to_f64()
}

#[test]
fn every_precision_sees_the_same_exponential() {
    // M(e, exp) = e^e
    let e = std::f64::consts::E;
    assert!((ln_max_exp::<f32>(1e-4) - e).abs() < 1e-3);
    assert!((ln_max_exp::<f64>(1e-12) - e).abs() < 1e-11);
    assert!((ln_max_exp::<f256>(1e-20) - e).abs() < 1e-15);
}

#[test]
fn wide_scalar_resolves_what_double_rounds_away() {
    let f = exp_spec(60, 1e-20).build::<f256>().unwrap().function;
    let t: f256 = lift(1.0);
    let v = max_modulus(&f, t).unwrap().value().unwrap();
    let e: f256 = f256::ONE.exp();
    assert!((v - e).abs() < lift(1e-25));
}

fn exp800() -> EntireFunction<f64> {
    exp_spec(800, 1e-12).build::<f64>().unwrap().function
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_bracket_pointwise_values(t in 0.0f64..5.0, theta in -3.14f64..3.14) {
        let f = exp800();
        // ln|exp(e^{t + i theta})|
        let truth = t.exp() * theta.cos();
        let slack = 1e-9 * truth.abs().max(1.0);
        match eval_log_modulus(&f, t, theta) {
            // lost to cancellation against terms of size about e^{e^t}
            Ok(v) if v.is_zero() => prop_assert!(truth < t.exp() - 30.0),
            Ok(v) => prop_assert!((v.ln_or_neg_inf() - truth).abs() <= slack, "{:?} vs {}", v, truth),
            Err(ModulusError::PrecisionExhausted { log_upper_bound }) => {
                prop_assert!(truth <= log_upper_bound + slack)
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        if let Some(lo) = log_modulus_lower_bound(&f, t) {
            prop_assert!(lo <= truth + slack);
        }
        if let Some(hi) = log_modulus_upper_bound(&f, t) {
            prop_assert!(truth <= hi + slack);
        }
    }

    #[test]
    fn max_is_attained_on_the_positive_axis(t in -2.0f64..4.0) {
        let f = exp800();
        let m = max_modulus(&f, t).unwrap().to_f64();
        prop_assert!((m - t.exp()).abs() <= 1e-9 * t.exp().max(1.0));
    }
}
