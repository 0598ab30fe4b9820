use f256::f256;

use super::*;
use crate::baker::{build_radii, KRule, DEFAULT_EXPONENT_CAP};
use crate::modulus::{max_modulus, min_modulus, SparseSeries, UniformGrid};
use crate::scalar::Real;

fn exp_z() -> EntireFunction<f64> {
    SparseSeries::exp_series(800, 1e-12).unwrap().into()
}

fn poly(terms: &[(u64, f64)]) -> EntireFunction<f64> {
    SparseSeries::polynomial(terms, 1e-12).unwrap().into()
}

fn quarter64() -> EntireFunction<f64> {
    SparseSeries::factorial_power(4, 400, 1e-12).unwrap().into()
}

fn quarter256() -> EntireFunction<f256> {
    SparseSeries::factorial_power(4, 400, f256::from_f64(1e-20)).unwrap().into()
}

fn desk_baker() -> EntireFunction<f256> {
    let t = build_radii::<f256>(0.003, 4.0, &KRule::Lambda { lambda: 1.0 }, 40, DEFAULT_EXPONENT_CAP)
        .unwrap();
    t.to_product(f256::from_f64(1e-12)).unwrap().into()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    UniformGrid::new(a, b, n).points()
}

#[test]
fn order_of_exp_is_one() {
    let est = estimate_order(&exp_z(), &linspace(1.0, 6.0, 32)).unwrap();
    assert!((est.lambda_hat - 1.0).abs() <= 0.05);
    assert!((est.rho_hat - 1.0).abs() <= 0.05);
    assert!(est.rho_hat <= est.lambda_hat);
}

#[test]
fn order_of_half_series_matches_coefficient_oracle() {
    let s = SparseSeries::<f64>::factorial_power(2, 1000, 1e-12).unwrap();
    let oracle = coefficient_order_oracle(&s).unwrap();
    assert!((oracle - 0.5).abs() < 0.01, "{oracle}");
    let est = estimate_order(&s.into(), &linspace(2.0, 13.0, 33)).unwrap();
    assert!((est.lambda_hat - 0.5).abs() <= 0.1, "{est:?}");
    assert!((est.lambda_hat - oracle).abs() <= 0.1);
}

#[test]
fn order_consistency_for_series() {
    let cases: [(SparseSeries<f64>, f64, f64); 3] = [
        (SparseSeries::exp_series(800, 1e-12).unwrap(), 1.0, 6.0),
        (SparseSeries::factorial_power(2, 1000, 1e-12).unwrap(), 2.0, 13.0),
        (SparseSeries::factorial_power(4, 400, 1e-12).unwrap(), 4.0, 23.0),
    ];
    for (s, a, b) in cases {
        assert!(s.len() >= 40);
        let oracle = coefficient_order_oracle(&s).unwrap();
        let est = estimate_order(&s.into(), &linspace(a, b, 32)).unwrap();
        assert!((est.lambda_hat - oracle).abs() <= 0.1, "{} vs {oracle}", est.lambda_hat);
    }
}

#[test]
fn order_of_baker_desk_product() {
    let est = estimate_order(&desk_baker(), &linspace(1.0, 16.0, 31)).unwrap();
    assert!((0.8..=1.2).contains(&est.lambda_hat), "{est:?}");
}

#[test]
fn order_needs_enough_samples() {
    assert!(matches!(
        estimate_order(&exp_z(), &linspace(1.0, 2.0, 8)),
        Err(GrowthError::Precondition(_))
    ));
    // ln M = r > 1 only for t > 0
    assert!(matches!(
        estimate_order(&exp_z(), &linspace(-3.0, 0.1, 20)),
        Err(GrowthError::RangeTooSmall { .. })
    ));
}

#[test]
fn coefficient_oracle_examples() {
    let e = SparseSeries::<f64>::exp_series(800, 1e-12).unwrap();
    assert!((coefficient_order_oracle(&e).unwrap() - 1.0).abs() < 0.01);
    let p = SparseSeries::<f64>::polynomial(&[(0, 1.0), (3, 2.0), (9, 1.0)], 1e-12).unwrap();
    assert_eq!(coefficient_order_oracle(&p), Some(0.0));
}

fn with_exponents(exps: Vec<u64>) -> SparseSeries<f64> {
    let n = exps.len();
    SparseSeries::from_log_terms(exps, vec![-1.0; n], vec![0.0; n], crate::modulus::SeriesTail::Exact, 1e-12)
        .unwrap()
}

#[test]
fn fabry_examples() {
    let sq = fabry_gap_check(&with_exponents((1..=30).map(|k| k * k).collect()), 10.0).unwrap();
    assert!(sq.consistent);
    assert_eq!(sq.ratios[4], 5.0);
    let lin = fabry_gap_check(&with_exponents((1..=30).map(|k| 2 * k).collect()), 10.0).unwrap();
    assert!(!lin.consistent);
    assert!(lin.ratios.iter().all(|&r| r == 2.0));
    let exps: Vec<u64> = (1..=40u64).map(|k| k * ((k + 2) as f64).ln().floor() as u64).collect();
    let slow = fabry_gap_check(&with_exponents(exps), 10.0).unwrap();
    for (k, r) in slow.ratios.iter().enumerate() {
        assert_eq!(*r, ((k + 3) as f64).ln().floor());
    }
    assert!(!slow.consistent);
    assert!(fabry_gap_check(&with_exponents(vec![1, 2, 3]), 10.0).is_err());
}

#[test]
fn exp_exceptional_set_is_everything() {
    let grid = UniformGrid::new(-1.0, 4.0, 40);
    let e = exceptional_set(&exp_z(), 0.5, &grid).unwrap();
    assert!(e.cells.iter().all(|c| c.marked));
    assert_eq!(e.set.intervals(), &[(-1.0, 4.0)]);
}

#[test]
fn two_plus_z_has_empty_exceptional_set() {
    let f = poly(&[(0, 2.0), (1, 1.0)]);
    let grid = UniformGrid::new(-4.0, -0.01, 30);
    let eps2 = 0.005;
    let e = exceptional_set(&f, eps2, &grid).unwrap();
    assert!(e.set.is_empty());
    for c in &e.cells {
        let r = (0.5 * (c.t_a + c.t_b)).exp();
        assert!((2.0 - r).ln() > eps2 * (2.0 + r).ln());
        assert!((c.log_min - (2.0 - r).ln()).abs() < 1e-9);
    }
}

#[test]
fn exceptional_set_complement_holds_at_midpoints() {
    let f = quarter256();
    let grid = UniformGrid::new(0.5, 14.0, 27);
    let eps2 = (0.3 * std::f64::consts::PI).cos();
    let e = exceptional_set(&f, eps2, &grid).unwrap();
    for c in &e.cells {
        if !c.marked && !c.excluded {
            assert!(c.min_exact && c.log_min > eps2 * c.log_max);
        }
    }
}

#[test]
fn delta_membership_examples() {
    let grid = UniformGrid::new(0.01, 4.0, 40);
    let d = delta_membership(&exp_z(), 0.9, 0.5, &grid, None).unwrap();
    assert!(!d.consistent);
    assert!(d.density.value > 0.99);

    // m = M = r on the window
    let f = poly(&[(1, 1.0)]);
    let g = UniformGrid::new(0.01, 3.0, 30);
    let d = delta_membership(&f, 0.5, 0.5, &g, None).unwrap();
    assert!(d.exceptional.set.is_empty());
    assert!(d.consistent && d.density.value == 0.0);
}

#[test]
fn quarter_order_series_is_consistent_with_delta() {
    let grid = UniformGrid::new(0.0, 16.0, 32);
    let eps2 = (0.3 * std::f64::consts::PI).cos();
    let d = delta_membership(&quarter256(), 0.9, eps2, &grid, None).unwrap();
    assert!(d.consistent, "{:?}", d.density);
}

#[test]
fn spike_for_quarter_order_series() {
    let f = quarter256();
    let t = f256::from_f64(8.0);
    let s = spike_finder(&f, t, 1.5, SEARCH_GRID).unwrap();
    assert!(s.t_prime > 8.0 && s.t_prime < 12.0);
    let tight = f.with_tolerance(f256::from_f64(1e-21)).unwrap();
    let m = min_modulus(&tight, f256::from_f64(s.t_prime)).unwrap().ln_or_neg_inf();
    let big = max_modulus(&tight, t).unwrap().ln_or_neg_inf();
    assert!(m > f256::from_f64(1.5) * big);
}

#[test]
fn spike_absent_for_exp_and_identity() {
    assert!(matches!(
        spike_finder(&exp_z(), 1.0, 2.0, 64),
        Err(GrowthError::NotFound { .. })
    ));
    let z = poly(&[(1, 1.0)]);
    match spike_finder(&z, 2.0, 1.5, 64) {
        Err(GrowthError::NotFound { best_margin }) => assert!(best_margin < 0.0 && best_margin > -0.1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn hadamard_examples() {
    let z2 = poly(&[(2, 1.0)]);
    assert!(hadamard_convexity_check(&z2, 0.5, 1.0, 3.0).unwrap().abs() < 1e-12);
    let l2 = 2f64.ln();
    let d = hadamard_convexity_check(&exp_z(), 0.0, l2, 2.0 * l2).unwrap();
    assert!((d - 0.5).abs() < 1e-10);
    assert!(hadamard_convexity_check(&exp_z(), 1.0, 1.0, 2.0).is_err());
}

fn convex_on_grid<T: Real>(f: &EntireFunction<T>, a: f64, b: f64) {
    let ts: Vec<T> = UniformGrid::new(a, b, 30).points();
    for i in 0..30 {
        for j in i + 1..30 {
            for k in j + 1..30 {
                match hadamard_convexity_check(f, ts[i], ts[j], ts[k]) {
                    Ok(d) => assert!(d >= -1e-9, "{d} at {i} {j} {k}"),
                    Err(GrowthError::Precondition(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

#[test]
fn log_max_is_convex_in_t() {
    convex_on_grid(&poly(&[(2, 1.0)]), 0.1, 5.0);
    convex_on_grid(&exp_z(), 0.1, 6.0);
    convex_on_grid(&quarter64(), 0.1, 22.0);
    convex_on_grid(&desk_baker(), 0.1, 150.0);
}

#[test]
fn growth_condition_examples() {
    let ts = linspace(0.5, 5.0, 20);
    let r = growth_condition_check(&exp_z(), GrowthCondition::Lower { c1: 2.0, c2: 1.5 }, &ts).unwrap();
    assert_eq!(r.fraction, 1.0);

    let z3 = poly(&[(3, 1.0)]);
    let r = growth_condition_check(&z3, GrowthCondition::Lower { c1: 2.0, c2: 1.5 }, &ts).unwrap();
    for &(t, _, _, pass) in &r.samples {
        assert_eq!(pass, (3.0 * 2f64.ln() + 3.0 * t) >= 1.5 * 3.0 * t);
    }
    assert!(r.first_failure.is_some());

    let q = growth_condition_check(&quarter64(), GrowthCondition::Upper { d1: 4.0, d2: 1.9 }, &linspace(4.0, 20.0, 17))
        .unwrap();
    assert!((0.0..=1.0).contains(&q.fraction));
    assert!(growth_condition_check(&exp_z(), GrowthCondition::Upper { d1: 3.0, d2: 1.9 }, &ts).is_err());
}

#[test]
fn hua_yang_on_quarter_order_series() {
    let f = quarter256();
    let seq = hua_yang_sequence(&f, f256::from_f64(2.0), 3, 64).unwrap();
    assert_eq!(seq.steps.len(), 3);
    for s in &seq.steps {
        assert!(s.pass && s.margin > 0.0, "{s:?}");
        let m = min_modulus(&f, f256::from_f64(s.t_t)).unwrap().ln_or_neg_inf().to_f64();
        assert!((m - s.log_min).abs() < 1e-9);
    }
    let v = lemma1_crossing_check(&seq.steps[..2], &[], 3.5).unwrap();
    assert!(v.pass);
    let s0 = seq.steps[0];
    let bad = (s0.t_r - 1.0, 3.5 * s0.t_r_next + 1.0);
    let v = lemma1_crossing_check(&seq.steps[..2], &[bad], 3.5).unwrap();
    assert_eq!(v.counterexample, Some((bad.0, bad.1, 1)));
    assert!(lemma1_crossing_check(&seq.steps[..2], &[], 2.5).is_err());
}

#[test]
fn hua_yang_for_exp_fails_without_error() {
    let seq = hua_yang_sequence(&exp_z(), 0.5, 1, 64).unwrap();
    assert_eq!(seq.steps.len(), 1);
    assert!(!seq.steps[0].pass);
    assert!(matches!(
        lemma1_crossing_check(&seq.steps, &[], 4.0),
        Err(GrowthError::HypothesisUnverified(_))
    ));
    let none = hua_yang_sequence(&exp_z(), 0.5, 0, 64).unwrap();
    assert!(none.steps.is_empty() && !none.range_exhausted);
}

#[test]
fn order_gap_examples() {
    let f = exp_z();
    let est = estimate_order(&f, &linspace(1.0, 6.0, 32)).unwrap();
    let seq = order_gap_sequence(&f, &est, 2.0, 1.5, 0.5, 4).unwrap();
    assert!(!seq.steps.is_empty());
    assert!(seq.steps.iter().all(|s| s.pass));
    assert!(seq.range_exhausted);

    let z5 = poly(&[(5, 1.0)]);
    let est5 = estimate_order(&z5, &linspace(1.0, 30.0, 32)).unwrap();
    assert!(matches!(
        order_gap_sequence(&z5, &est5, 2.0, 1.5, 1.0, 2),
        Err(GrowthError::Precondition(_))
    ));

    let q = quarter64();
    let est = estimate_order(&q, &linspace(4.0, 22.0, 32)).unwrap();
    let seq = order_gap_sequence(&q, &est, 3.0, 2.0, 3.0, 2).unwrap();
    assert_eq!(seq.steps.len(), 2);
    for s in &seq.steps {
        assert!((s.margin - (s.lhs - s.rhs)).abs() < 1e-9);
    }
}
