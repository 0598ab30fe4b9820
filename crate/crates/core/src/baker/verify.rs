use rayon::prelude::*;

use super::{BakerError, RadiiTable};
use crate::growth::{upper_log_density, DensityEstimate, IntervalSet};
use crate::modulus::{eval_log_modulus, max_modulus, min_modulus, EntireFunction};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BracketLabel {
    A,
    Q,
    Component,
}

/// `t_inner <= ln|z| <= t_outer`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusBracket<T> {
    pub t_inner: T,
    pub t_outer: T,
    pub label: BracketLabel,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annuli<T> {
    pub a: Vec<AnnulusBracket<T>>,
    pub q: Vec<AnnulusBracket<T>>,
    /// Indices whose `A_n` came out empty.
    pub empty: Vec<usize>,
}

impl<T: Real> Annuli<T> {
    pub fn a_n(&self, n: usize) -> Option<&AnnulusBracket<T>> {
        self.a.iter().find(|b| b.n == n)
    }
}

/// Pass/fail with signed slacks; a positive margin is room to spare.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub check: String,
    pub n: usize,
    pub pass: bool,
    pub margins: Vec<f64>,
}

fn two<T: Real>() -> T {
    T::from_u64(2)
}

fn a_bounds<T: Real>(table: &RadiiTable<T>, n: usize) -> Option<(T, T)> {
    Some((two::<T>() * table.t(n)?, table.t(n + 1)? / two()))
}

/// `A_n = [2 t_n, t_{n+1}/2]` and `Q_n = [t_n/2, 2 t_{n+1}]` for every
/// `n > n0` with `r_n > 1` and `t_{n+1}` known.
pub fn annuli<T: Real>(table: &RadiiTable<T>) -> Annuli<T> {
    let mut out = Annuli {
        a: vec![],
        q: vec![],
        empty: vec![],
    };
    let Some(n0) = table.n0() else {
        return out;
    };
    for n in n0 + 1..table.len() {
        if !(table.t(n).unwrap() > T::zero()) {
            continue;
        }
        let (lo, hi) = a_bounds(table, n).unwrap();
        if hi > lo {
            out.a.push(AnnulusBracket {
                t_inner: lo,
                t_outer: hi,
                label: BracketLabel::A,
                n,
            });
        } else {
            out.empty.push(n);
        }
        let ql = table.t(n).unwrap() / two();
        let qh = two::<T>() * table.t(n + 1).unwrap();
        if qh > ql {
            out.q.push(AnnulusBracket {
                t_inner: ql,
                t_outer: qh,
                label: BracketLabel::Q,
                n,
            });
        }
    }
    out
}

fn after_n0<T: Real>(table: &RadiiTable<T>, n: usize) -> Result<(), BakerError> {
    match table.n0() {
        Some(n0) if n > n0 => Ok(()),
        _ => Err(BakerError::Precondition {
            n,
            why: format!("index not past n0 = {:?}", table.n0()),
        }),
    }
}

fn outside_unit_disk<T: Real>(table: &RadiiTable<T>, n: usize) -> Result<(), BakerError> {
    match table.t(n) {
        Some(t) if t > T::zero() => Ok(()),
        _ => Err(BakerError::Precondition {
            n,
            why: "needs r_n > 1".into(),
        }),
    }
}

/// Checks `f(A_n) ⊂ A_{n+1}` through the boundary circles of `A_n`.
///
/// Margins are `min m - 2 t_{n+1}` and `t_{n+2}/2 - M(t_{n+1}/2)`.
pub fn verify_forward_invariance<T: Real>(
    f: &EntireFunction<T>,
    table: &RadiiTable<T>,
    n: usize,
) -> Result<Verdict, BakerError> {
    after_n0(table, n)?;
    outside_unit_disk(table, n)?;
    let t_far = table.need(n, n + 2)?;
    let (lo, hi) = a_bounds(table, n).unwrap();
    let (lo1, _) = a_bounds(table, n + 1).unwrap();
    if hi <= lo {
        return Err(BakerError::EmptyAnnulus { n });
    }
    if t_far / two() <= lo1 {
        return Err(BakerError::EmptyAnnulus { n: n + 1 });
    }
    let m_in = min_modulus(f, lo)?;
    let m_out = min_modulus(f, hi)?;
    let big = max_modulus(f, hi)?;
    let inner = m_in.min(m_out).ln_or_neg_inf() - lo1;
    let outer = t_far / two() - big.ln_or_neg_inf();
    let zero = T::zero();
    Ok(Verdict {
        check: "forward_invariance".into(),
        n,
        pass: inner >= zero && outer >= zero,
        margins: vec![inner.to_f64(), outer.to_f64()],
    })
}

/// `ln|f(2 r_n)| > k_n ln 2`; `k_n = 0` passes with no margin.
pub fn verify_growth_markers<T: Real>(
    f: &EntireFunction<T>,
    table: &RadiiTable<T>,
    n: usize,
) -> Result<Verdict, BakerError> {
    let k = table.k(n).ok_or(BakerError::NotEnoughRadii {
        n,
        needed: n,
        have: table.exponents().len(),
    })?;
    let mut v = Verdict {
        check: "growth_marker".into(),
        n,
        pass: true,
        margins: vec![],
    };
    if k == 0 {
        return Ok(v);
    }
    let t = table.t(n).unwrap() + T::ln2();
    let value = eval_log_modulus(f, t, T::zero())?.ln_or_neg_inf();
    let slack = value - T::from_u64(k) * T::ln2();
    v.pass = slack > T::zero();
    v.margins.push(slack.to_f64());
    Ok(v)
}

/// `ln t_{n+1} / t_{n-1}`.
pub fn loglog_ratio<T: Real>(t_prev: T, t_next: T) -> T {
    t_next.ln() / t_prev
}

/// `ln ln r_{n+1} / ln r_{n-1} < 2 lambda + 1`. Returns the verdict and
/// the ratio.
pub fn verify_loglog_ratio<T: Real>(
    table: &RadiiTable<T>,
    n: usize,
    lambda: f64,
) -> Result<(Verdict, f64), BakerError> {
    if n < 2 {
        return Err(BakerError::Precondition {
            n,
            why: "needs n >= 2".into(),
        });
    }
    after_n0(table, n)?;
    let t_prev = table.t(n - 1).unwrap();
    if !(t_prev > T::one()) {
        return Err(BakerError::Precondition {
            n,
            why: "needs t_{n-1} > 1".into(),
        });
    }
    let t_next = table.need(n, n + 1)?;
    let value = loglog_ratio(t_prev, t_next).to_f64();
    let margin = 2.0 * lambda + 1.0 - value;
    Ok((
        Verdict {
            check: "loglog_ratio".into(),
            n,
            pass: margin > 0.0,
            margins: vec![margin],
        },
        value,
    ))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GapDensityReport {
    /// `(t_n - ln 4, t_n + ln 4)` over `n > n0`.
    pub intervals: IntervalSet,
    pub density: DensityEstimate,
    pub bound: f64,
    pub pass: bool,
    /// `ln 4 - (ln M - ln m)` sampled inside each `(t_n + ln 4, t_{n+1} - ln 4)`.
    pub ratio_checks: Vec<Verdict>,
}

/// Log density of the union of `(r_n/4, 4 r_n)` and the `M < 4m` check
/// between them. All `k_n` must be odd.
pub fn gap_density_bound<T: Real>(
    f: &EntireFunction<T>,
    table: &RadiiTable<T>,
    samples_per_gap: usize,
) -> Result<GapDensityReport, BakerError> {
    if let Some(i) = table.exponents().iter().position(|k| k % 2 == 0) {
        return Err(BakerError::EvenExponent { n: i + 1 });
    }
    let n0 = table.n0().unwrap_or(table.len());
    if table.len() < n0 + 3 {
        return Err(BakerError::Precondition {
            n: n0,
            why: "fewer than 3 radii past n0".into(),
        });
    }
    let ln4 = T::from_u64(4).ln();
    let ln4f = ln4.to_f64();
    let centers: Vec<f64> = table.log_radii()[n0..].iter().map(|t| t.to_f64()).collect();
    let intervals = IntervalSet::new(centers.iter().map(|&c| (c - ln4f, c + ln4f)).collect());
    let windows: Vec<f64> = centers.iter().map(|c| c + ln4f).filter(|&w| w > 0.0).collect();
    let density = upper_log_density(&intervals, &windows);

    let cap = f.certified_max_t();
    let mut ratio_checks = Vec::new();
    for n in n0 + 1..table.len() {
        let lo = table.t(n).unwrap() + ln4;
        let mut hi = table.t(n + 1).unwrap() - ln4;
        if let Some(c) = cap {
            hi = hi.min(c);
        }
        if hi <= lo || samples_per_gap == 0 {
            continue;
        }
        let h = (hi - lo) / T::from_u64(samples_per_gap as u64);
        let margins: Result<Vec<f64>, BakerError> = (0..samples_per_gap)
            .into_par_iter()
            .map(|j| {
                let t = lo + h * (T::from_u64(j as u64) + T::from_f64(0.5));
                let big = max_modulus(f, t)?.ln_or_neg_inf();
                let small = min_modulus(f, t)?.ln_or_neg_inf();
                Ok((ln4 - (big - small)).to_f64())
            })
            .collect();
        let margins = margins?;
        ratio_checks.push(Verdict {
            check: "gap_ratio".into(),
            n,
            pass: margins.iter().all(|&m| m > 0.0),
            margins,
        });
    }
    Ok(GapDensityReport {
        pass: density.value <= 0.5,
        intervals,
        density,
        bound: 0.5,
        ratio_checks,
    })
}
