use f256::f256;
use proptest::prelude::*;

use super::*;
use crate::modulus::EntireFunction;
use crate::scalar::Real;

type F = f256;

fn f(x: f64) -> F {
    F::from_f64(x)
}

fn desk() -> RadiiTable<F> {
    build_radii(0.003, 4.0, &KRule::Lambda { lambda: 1.0 }, 40, DEFAULT_EXPONENT_CAP).unwrap()
}

fn odd_desk() -> RadiiTable<F> {
    build_radii(0.003, 4.0, &KRule::LambdaOdd { lambda: 1.0 }, 40, DEFAULT_EXPONENT_CAP).unwrap()
}

fn product(t: &RadiiTable<F>) -> EntireFunction<F> {
    t.to_product(f(1e-12)).unwrap().into()
}

fn from_ts(ts: &[f64]) -> RadiiTable<f64> {
    RadiiTable::from_parts(
        0.003,
        KRule::Explicit { k: vec![] },
        ts.to_vec(),
        vec![1; ts.len()],
        StopReason::Complete,
    )
    .unwrap()
}

#[test]
fn first_step_is_two_c() {
    let t: RadiiTable<f64> =
        build_radii(0.003, 4.0, &KRule::Explicit { k: vec![1] }, 2, DEFAULT_EXPONENT_CAP).unwrap();
    assert_eq!(t.exponents(), &[1]);
    assert!((t.t(2).unwrap() - 0.006f64.ln()).abs() < 1e-15);
    assert_eq!(t.stop(), StopReason::Complete);
}

#[test]
fn lambda_prefix_is_not_monotone() {
    let t = desk();
    assert_eq!(t.k(1), Some(4));
    assert!(t.t(2).unwrap() < t.t(1).unwrap());
    assert!(t.n0().unwrap() > 1);
}

#[test]
fn parameter_violations() {
    let lam = KRule::Lambda { lambda: 1.0 };
    let bad = |c: f64, r1: f64, rule: &KRule, n: usize| {
        matches!(
            build_radii::<f64>(c, r1, rule, n, DEFAULT_EXPONENT_CAP),
            Err(BakerError::ParameterViolation(_))
        )
    };
    assert!(bad(0.5, 4.0, &lam, 10));
    assert!(bad(0.0, 4.0, &lam, 10));
    assert!(bad(0.034, 4.0, &lam, 10));
    assert!(!bad(0.033, 4.0, &lam, 10));
    assert!(bad(0.003, 2.0, &lam, 10));
    assert!(bad(0.003, 4.0, &lam, 1));
    assert!(bad(0.003, 4.0, &KRule::Lambda { lambda: 0.0 }, 10));
    assert!(bad(0.003, 4.0, &KRule::Explicit { k: vec![1, 0, 1] }, 3));
    assert!(bad(0.003, 4.0, &KRule::Explicit { k: vec![1] }, 3));
}

#[test]
fn desk_table_matches_direct_product() {
    let t = desk();
    let mut ks = vec![4];
    ks.extend([0; 9]);
    ks.extend([1, 3, 12, 219665]);
    assert_eq!(t.exponents(), &ks[..]);
    assert_eq!(t.stop(), StopReason::ExponentOverflow { n: 15 });
    assert_eq!(t.len(), 16);
    assert_eq!(t.frontier().len(), 2);
    assert_eq!(t.n0(), Some(3));
    // r_{n+1} = C prod (1 + (r_n/r_i)^{k_i}) in plain f64
    let mut r = vec![4.0f64];
    for n in 0..14 {
        let mut p = 0.003;
        for i in 0..=n {
            p *= 1.0 + (r[n] / r[i]).powi(ks[i] as i32);
        }
        r.push(p);
    }
    for (n, rn) in r.iter().enumerate() {
        let got = t.t(n + 1).unwrap().to_f64();
        assert!((got - rn.ln()).abs() <= 1e-12 * rn.ln().abs().max(1.0), "n = {}", n + 1);
    }
}

#[test]
fn odd_rule_table() {
    let t = odd_desk();
    assert_eq!(t.exponents(), &[5, 1, 1, 1, 1, 3, 43161639]);
    assert!(t.exponents().iter().all(|k| k % 2 == 1));
    assert_eq!(t.stop(), StopReason::ExponentOverflow { n: 8 });
    assert_eq!(t.n0(), Some(3));
}

#[test]
fn zero_exponents_fold_into_constant() {
    let t = desk();
    let p = t.to_product(f(1e-12)).unwrap();
    assert_eq!(p.exponents(), &[4, 1, 3, 12, 219665]);
    let want = t.log_c() + F::from_u64(9) * F::ln2();
    assert!((p.log_c() - want).abs() < f(1e-70));
    assert_eq!(p.tail_log_radius(), t.t(15));
}

#[test]
fn lambda_exponent_snaps_rounding_below_integers() {
    // e^{ln 4} lands a hair under 4 in f64
    assert_eq!(lambda_exponent(1.0f64, 4.0f64.ln(), DEFAULT_EXPONENT_CAP), Some(4));
    assert_eq!(lambda_exponent(1.0f64, 3.9f64.ln(), DEFAULT_EXPONENT_CAP), Some(3));
    assert_eq!(lambda_exponent(1.0f64, -1.0, DEFAULT_EXPONENT_CAP), Some(0));
    assert_eq!(lambda_exponent(1.0f64, 50.0, DEFAULT_EXPONENT_CAP), None);
}

#[test]
fn annulus_formulas() {
    let a = annuli(&from_ts(&[1.0, 3.0, 10.0, 100.0]));
    let a3 = a.a_n(3).unwrap();
    assert_eq!((a3.t_inner, a3.t_outer), (20.0, 50.0));
    assert_eq!(a.empty, vec![2]);
    let q3 = a.q.iter().find(|q| q.n == 3).unwrap();
    assert_eq!((q3.t_inner, q3.t_outer), (5.0, 200.0));
    let b = annuli(&from_ts(&[1.0, 3.0, 10.0, 30.0]));
    assert!(b.a_n(3).is_none());
    assert!(b.empty.contains(&3));
}

#[test]
fn desk_annuli_are_ordered_and_inside_q() {
    let t = desk();
    let a = annuli(&t);
    let ns: Vec<usize> = a.a.iter().map(|b| b.n).collect();
    assert!(ns.contains(&13) && ns.contains(&14) && ns.contains(&15));
    for w in a.a.windows(2) {
        assert!(w[0].t_outer < w[1].t_inner);
    }
    for b in &a.a {
        let q = a.q.iter().find(|q| q.n == b.n).unwrap();
        assert!(q.t_inner <= b.t_inner && b.t_outer <= q.t_outer);
    }
}

#[test]
fn forward_invariance_on_desk_table() {
    let t = desk();
    let fp = product(&t);
    let mut passed = false;
    for n in [13, 14] {
        let v = verify_forward_invariance(&fp, &t, n).unwrap();
        assert!(v.pass, "{v:?}");
        assert!(v.margins.iter().all(|&m| m > 0.0));
        passed = true;
    }
    assert!(passed);
    assert!(matches!(
        verify_forward_invariance(&fp, &t, 11),
        Err(BakerError::EmptyAnnulus { n: 11 })
    ));
    assert!(matches!(
        verify_forward_invariance(&fp, &t, 9),
        Err(BakerError::Precondition { .. })
    ));
    assert!(matches!(
        verify_forward_invariance(&fp, &t, 15),
        Err(BakerError::NotEnoughRadii { .. })
    ));
    assert!(matches!(
        verify_forward_invariance(&fp, &t, 3),
        Err(BakerError::Precondition { .. })
    ));
}

#[test]
fn shrunk_outer_radius_fails_forward_invariance() {
    let t = desk();
    let mut radii = t.log_radii().to_vec();
    radii[15] = radii[14] * f(10.0);
    let tampered = RadiiTable::from_parts(
        t.c(),
        t.rule().clone(),
        radii,
        t.exponents().to_vec(),
        t.stop(),
    )
    .unwrap();
    assert_eq!(tampered.n0(), Some(3));
    let v = verify_forward_invariance(&product(&tampered), &tampered, 14).unwrap();
    assert!(!v.pass);
    assert!(v.margins[1] < 0.0);
}

#[test]
fn growth_markers() {
    let t = desk();
    let fp = product(&t);
    for n in 1..=14 {
        let v = verify_growth_markers(&fp, &t, n).unwrap();
        assert!(v.pass, "{v:?}");
    }
    let zero = verify_growth_markers(&fp, &t, 2).unwrap();
    assert!(zero.pass && zero.margins.is_empty());

    let toy: RadiiTable<f64> =
        build_radii(0.003, 4.0, &KRule::Explicit { k: vec![3] }, 2, DEFAULT_EXPONENT_CAP).unwrap();
    let single: EntireFunction<f64> =
        crate::modulus::BakerProduct::new(0.003f64.ln(), vec![4.0f64.ln()], vec![3], None, 1e-12)
            .unwrap()
            .into();
    let v = verify_growth_markers(&single, &toy, 1).unwrap();
    assert!(!v.pass);
    let want = (0.003f64 * 9.0).ln() - 3.0 * 2f64.ln();
    assert!((v.margins[0] - want).abs() < 1e-12);
}

#[test]
fn loglog_ratio_checks() {
    let t = desk();
    for n in [13, 14, 15] {
        let (v, value) = verify_loglog_ratio(&t, n, 1.0).unwrap();
        assert!(v.pass && value < 3.0, "n = {n}: {value}");
    }
    let toy = from_ts(&[15.0, 20.0, 30f64.exp()]);
    let (v, value) = verify_loglog_ratio(&toy, 2, 1.0).unwrap();
    assert!((value - 2.0).abs() < 1e-14);
    assert!(v.pass);
    assert!(!verify_loglog_ratio(&toy, 2, 0.4).unwrap().0.pass);
    assert!(matches!(
        verify_loglog_ratio(&t, 3, 1.0),
        Err(BakerError::Precondition { .. })
    ));
}

#[test]
fn gap_density_on_odd_table() {
    let t = odd_desk();
    let r = gap_density_bound(&product(&t), &t, 8).unwrap();
    assert!(r.density.value <= 0.5 + 0.1);
    assert!(r.pass);
    assert!(!r.ratio_checks.is_empty());
    assert!(r.ratio_checks.iter().all(|v| v.pass), "{:?}", r.ratio_checks);
}

#[test]
fn gap_density_rejects_even_exponents() {
    let t: RadiiTable<f64> = build_radii(
        0.003,
        4.0,
        &KRule::Explicit { k: vec![3, 2, 5, 7] },
        4,
        DEFAULT_EXPONENT_CAP,
    )
    .unwrap();
    let fp: EntireFunction<f64> = t.to_product(1e-12).unwrap().into();
    assert_eq!(gap_density_bound(&fp, &t, 4).unwrap_err(), BakerError::EvenExponent { n: 2 });
}

#[test]
fn table_round_trips_through_csv() {
    let t = desk();
    let mut buf = Vec::new();
    write_table(&t, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("n,t_n,k_n\n"));
    assert!(text.trim_end().ends_with(','));
    let side = TableSidecar::of(&t, 128);
    let json = serde_json::to_string(&side).unwrap();
    let side2: TableSidecar = serde_json::from_str(&json).unwrap();
    let back: RadiiTable<F> = read_table(&buf[..], &side2).unwrap();
    assert_eq!(back, t);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn build_is_deterministic(c in 1e-4..0.0033f64, r1 in 2.01..50.0f64, lam in 0.2..2.0f64) {
        let rule = KRule::Lambda { lambda: lam };
        let a: RadiiTable<f64> = build_radii(c, r1, &rule, 30, DEFAULT_EXPONENT_CAP).unwrap();
        let b: RadiiTable<f64> = build_radii(c, r1, &rule, 30, DEFAULT_EXPONENT_CAP).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn doubling_persists_past_n0(c in 1e-4..0.0033f64, r1 in 2.01..50.0f64, lam in 0.2..2.0f64) {
        let t: RadiiTable<f64> =
            build_radii(c, r1, &KRule::LambdaOdd { lambda: lam }, 30, DEFAULT_EXPONENT_CAP).unwrap();
        if let Some(n0) = t.n0() {
            for n in n0..t.len() {
                prop_assert!(t.t(n + 1).unwrap() - t.t(n).unwrap() > 2f64.ln());
            }
        }
    }

    #[test]
    fn annuli_are_separated(c in 1e-4..0.0033f64, r1 in 2.01..50.0f64, lam in 0.2..2.0f64) {
        let t: RadiiTable<f64> =
            build_radii(c, r1, &KRule::Lambda { lambda: lam }, 30, DEFAULT_EXPONENT_CAP).unwrap();
        let a = annuli(&t);
        for w in a.a.windows(2) {
            prop_assert!(w[0].t_outer < w[1].t_inner);
        }
        for b in &a.a {
            prop_assert!(b.t_inner < b.t_outer);
            let q = a.q.iter().find(|q| q.n == b.n).unwrap();
            prop_assert!(q.t_inner <= b.t_inner && b.t_outer <= q.t_outer);
        }
    }
}
