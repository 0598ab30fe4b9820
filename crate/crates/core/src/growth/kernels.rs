use rayon::prelude::*;

use super::{log_max, log_min, GrowthError, GrowthEstimate};
use crate::modulus::EntireFunction;
use crate::scalar::Real;

/// Default number of coarse points in the searches below.
pub const SEARCH_GRID: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Spike {
    pub t: f64,
    pub t_prime: f64,
    pub log_min: f64,
    pub target: f64,
    pub margin: f64,
}

/// `(lo, hi)` split into `n` steps; interior points only.
fn interior<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let h = (hi - lo) / T::from_u64(n as u64);
    (1..n).map(|i| lo + h * T::from_u64(i as u64)).collect()
}

/// Lower bounds of `ln m` at each point, in order.
fn min_profile<T: Real>(f: &EntireFunction<T>, ts: &[T]) -> Result<Vec<super::MinValue<T>>, GrowthError> {
    ts.par_iter().map(|&t| log_min(f, t)).collect()
}

/// First `t'` in `(t, h t)`, scanning upwards, with `ln m(t') > h ln M(t)`.
/// A coarse grid is tried first, then a finer one around the best point.
pub fn spike_finder<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    h: f64,
    grid: usize,
) -> Result<Spike, GrowthError> {
    if !(h > 1.0) || !(t > T::zero()) || grid < 2 {
        return Err(GrowthError::Precondition(format!(
            "needs h > 1, t > 0 and a grid of 2+ points (h = {h}, t = {})",
            t.to_f64()
        )));
    }
    let hh = T::from_f64(h);
    let target = hh * log_max(f, t)?;
    let hit = |ts: &[T], vals: &[super::MinValue<T>]| {
        ts.iter().zip(vals).find(|(_, v)| v.exceeds(target) == Some(true)).map(|(tp, v)| Spike {
            t: t.to_f64(),
            t_prime: tp.to_f64(),
            log_min: v.bound().to_f64(),
            target: target.to_f64(),
            margin: (v.bound() - target).to_f64(),
        })
    };
    let coarse = interior(t, hh * t, grid);
    let vals = min_profile(f, &coarse)?;
    if let Some(s) = hit(&coarse, &vals) {
        return Ok(s);
    }
    let (ib, best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.bound().partial_cmp(&b.1.bound()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, v)| (i, v.bound()))
        .unwrap();
    let lo = if ib == 0 { t } else { coarse[ib - 1] };
    let hi = coarse.get(ib + 1).copied().unwrap_or(hh * t);
    let fine = interior(lo, hi, 64);
    let fvals = min_profile(f, &fine)?;
    if let Some(s) = hit(&fine, &fvals) {
        return Ok(s);
    }
    let best = fvals.iter().map(|v| v.bound()).fold(best, |a, b| a.max(b));
    Err(GrowthError::NotFound {
        best_margin: (best - target).to_f64(),
    })
}

/// `chord(t2) - ln M(t2)` for the chord through `t1` and `t3`.
pub fn hadamard_convexity_check<T: Real>(
    f: &EntireFunction<T>,
    t1: T,
    t2: T,
    t3: T,
) -> Result<f64, GrowthError> {
    if !(t1 < t2 && t2 < t3) {
        return Err(GrowthError::Precondition("needs t1 < t2 < t3".into()));
    }
    let m1 = log_max(f, t1)?;
    let m2 = log_max(f, t2)?;
    let m3 = log_max(f, t3)?;
    if !(m1 > T::zero() && m2 > T::zero() && m3 > T::zero()) {
        return Err(GrowthError::Precondition("ln M must be positive at all three radii".into()));
    }
    let chord = m1 + (m3 - m1) * (t2 - t1) / (t3 - t1);
    Ok((chord - m2).to_f64())
}

/// Which side of the growth inequality to test.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GrowthCondition {
    /// `ln M(c1 r) >= c2 ln M(r)`.
    Lower { c1: f64, c2: f64 },
    /// `ln M(d1 r) < d2 ln M(r)` with `d1 > d2^2`.
    Upper { d1: f64, d2: f64 },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GrowthConditionReport {
    pub condition: GrowthCondition,
    pub fraction: f64,
    pub first_failure: Option<f64>,
    /// `(t, lhs, rhs, pass)`.
    pub samples: Vec<(f64, f64, f64, bool)>,
}

pub fn growth_condition_check<T: Real>(
    f: &EntireFunction<T>,
    condition: GrowthCondition,
    ts: &[f64],
) -> Result<GrowthConditionReport, GrowthError> {
    let (scale, factor) = match condition {
        GrowthCondition::Lower { c1, c2 } => {
            if !(c1 > 1.0 && c2 > 1.0) {
                return Err(GrowthError::Precondition("needs c1 > 1 and c2 > 1".into()));
            }
            (c1, c2)
        }
        GrowthCondition::Upper { d1, d2 } => {
            if !(d2 > 1.0 && d1 > d2 * d2) {
                return Err(GrowthError::Precondition("needs d2 > 1 and d1 > d2^2".into()));
            }
            (d1, d2)
        }
    };
    let shift = T::from_f64(scale).ln();
    let k = T::from_f64(factor);
    let samples: Vec<(f64, f64, f64, bool)> = ts
        .par_iter()
        .map(|&t| {
            let tt = T::from_f64(t);
            let lhs = log_max(f, tt + shift)?;
            let rhs = k * log_max(f, tt)?;
            let pass = match condition {
                GrowthCondition::Lower { .. } => lhs >= rhs,
                GrowthCondition::Upper { .. } => lhs < rhs,
            };
            Ok((t, lhs.to_f64(), rhs.to_f64(), pass))
        })
        .collect::<Result<_, GrowthError>>()?;
    let good = samples.iter().filter(|s| s.3).count();
    Ok(GrowthConditionReport {
        condition,
        fraction: if samples.is_empty() { 1.0 } else { good as f64 / samples.len() as f64 },
        first_failure: samples.iter().find(|s| !s.3).map(|s| s.0),
        samples,
    })
}

/// Steps of a radius sequence; `range_exhausted` marks an early stop at
/// the edge of the certified range.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Sequence<S> {
    pub steps: Vec<S>,
    pub range_exhausted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HuaYangStep {
    pub n: usize,
    pub t_r: f64,
    /// `ln M(R_n)`, i.e. `ln R_{n+1}`.
    pub t_r_next: f64,
    pub window: (f64, f64),
    pub t_t: f64,
    pub log_min: f64,
    /// `(2 + 1/(n+1)) ln R_{n+1}`.
    pub target: f64,
    pub margin: f64,
    pub pass: bool,
}

fn range_stop<S>(e: GrowthError, steps: Vec<S>) -> Result<Sequence<S>, GrowthError> {
    match e {
        GrowthError::Modulus(m) if m.is_range() => Ok(Sequence {
            steps,
            range_exhausted: true,
        }),
        e => Err(e),
    }
}

/// Best `ln m` over `(lo, hi)`: coarse grid, then a finer grid around the
/// maximum.
fn max_min_modulus<T: Real>(f: &EntireFunction<T>, lo: T, hi: T, grid: usize) -> Result<(T, T), GrowthError> {
    let coarse = interior(lo, hi, grid.max(2));
    let vals = min_profile(f, &coarse)?;
    let ib = (0..vals.len())
        .max_by(|&a, &b| vals[a].bound().partial_cmp(&vals[b].bound()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    let a = if ib == 0 { lo } else { coarse[ib - 1] };
    let b = coarse.get(ib + 1).copied().unwrap_or(hi);
    let fine = interior(a, b, 64);
    let fvals = min_profile(f, &fine)?;
    let mut best = (coarse[ib], vals[ib].bound());
    for (t, v) in fine.iter().zip(&fvals) {
        if v.bound() > best.1 {
            best = (*t, v.bound());
        }
    }
    Ok(best)
}

/// `R_{n+1} = M(R_n)` and, for each `n`, the radius `t_n` in
/// `(R_n^{2+2/(2n+1)}, R_n^{2+1/n})` with the largest `m`, checked against
/// `m(t_n) > R_{n+1}^{2+1/(n+1)}`.
pub fn hua_yang_sequence<T: Real>(
    f: &EntireFunction<T>,
    t_r1: T,
    steps: usize,
    grid: usize,
) -> Result<Sequence<HuaYangStep>, GrowthError> {
    let mut out = Vec::with_capacity(steps);
    let mut t_r = t_r1;
    for n in 1..=steps {
        let nn = T::from_u64(n as u64);
        let two = T::from_u64(2);
        let t_next = match log_max(f, t_r) {
            Ok(v) => v,
            Err(e) => return range_stop(e, out),
        };
        let lo = (two + two / (two * nn + T::one())) * t_r;
        let hi = (two + T::one() / nn) * t_r;
        let (t_t, lm) = match max_min_modulus(f, lo, hi, grid) {
            Ok(v) => v,
            Err(e) => return range_stop(e, out),
        };
        let target = (two + T::one() / (nn + T::one())) * t_next;
        out.push(HuaYangStep {
            n,
            t_r: t_r.to_f64(),
            t_r_next: t_next.to_f64(),
            window: (lo.to_f64(), hi.to_f64()),
            t_t: t_t.to_f64(),
            log_min: lm.to_f64(),
            target: target.to_f64(),
            margin: (lm - target).to_f64(),
            pass: lm > target,
        });
        t_r = t_next;
    }
    Ok(Sequence {
        steps: out,
        range_exhausted: false,
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Lemma1Verdict {
    pub pass: bool,
    /// `sup c(n)` over the steps.
    pub a: f64,
    pub b: f64,
    /// `(t_inner, t_outer, n)` of the first bracket reaching from `R_n` to
    /// `R_{n+1}^b`.
    pub counterexample: Option<(f64, f64, usize)>,
}

/// With `c(n) = 2 + 1/n`: after confirming the sequence hypotheses on
/// `steps`, checks that no bracket `[t_inner, t_outer]` reaches from
/// `ln R_n` to `b ln R_{n+1}`.
pub fn lemma1_crossing_check(
    steps: &[HuaYangStep],
    brackets: &[(f64, f64)],
    b: f64,
) -> Result<Lemma1Verdict, GrowthError> {
    let c = |n: usize| 2.0 + 1.0 / n as f64;
    for (i, s) in steps.iter().enumerate() {
        if let Some(next) = steps.get(i + 1) {
            if next.t_r != s.t_r_next {
                return Err(GrowthError::HypothesisUnverified(format!(
                    "step {}: R_{{n+1}} is not M(R_n)",
                    s.n
                )));
            }
        }
        if !(s.t_r < s.t_t && s.t_t < c(s.n) * s.t_r) {
            return Err(GrowthError::HypothesisUnverified(format!(
                "step {}: t_n outside (R_n, R_n^c(n))",
                s.n
            )));
        }
        if !(s.log_min > c(s.n + 1) * s.t_r_next) {
            return Err(GrowthError::HypothesisUnverified(format!(
                "step {}: m(t_n) <= R_(n+1)^c(n+1)",
                s.n
            )));
        }
    }
    let a = steps.iter().map(|s| c(s.n)).fold(2.0, f64::max);
    if !(b > a) {
        return Err(GrowthError::Precondition(format!("needs b > a = {a}")));
    }
    let counterexample = brackets.iter().find_map(|&(lo, hi)| {
        steps
            .iter()
            .find(|s| lo <= s.t_r && hi >= b * s.t_r_next)
            .map(|s| (lo, hi, s.n))
    });
    Ok(Lemma1Verdict {
        pass: counterexample.is_none(),
        a,
        b,
        counterexample,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct OrderGapStep {
    pub n: usize,
    pub t_r: f64,
    /// `ln M(R_n^A)`.
    pub lhs: f64,
    /// `B ln M(R_n)`.
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// `M(R_n^A) > M(R_n)^B` along `R_{n+1} = M(R_n)`.
pub fn order_gap_sequence<T: Real>(
    f: &EntireFunction<T>,
    estimate: &GrowthEstimate,
    a: f64,
    b: f64,
    t_r: T,
    steps: usize,
) -> Result<Sequence<OrderGapStep>, GrowthError> {
    if f.is_polynomial() || !(estimate.rho_hat > 0.0) {
        return Err(GrowthError::Precondition("lower order is zero".into()));
    }
    let ratio = estimate.lambda_hat / estimate.rho_hat;
    if !(a > ratio) {
        return Err(GrowthError::Precondition(format!("needs A > lambda/rho = {ratio}")));
    }
    if !(b > 1.0) {
        return Err(GrowthError::Precondition("needs B > 1".into()));
    }
    let (aa, bb) = (T::from_f64(a), T::from_f64(b));
    let mut out = Vec::with_capacity(steps);
    let mut t = t_r;
    for n in 1..=steps {
        let here = match log_max(f, t) {
            Ok(v) => v,
            Err(e) => return range_stop(e, out),
        };
        let lhs = match log_max(f, aa * t) {
            Ok(v) => v,
            Err(e) => return range_stop(e, out),
        };
        let rhs = bb * here;
        out.push(OrderGapStep {
            n,
            t_r: t.to_f64(),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            margin: (lhs - rhs).to_f64(),
            pass: lhs > rhs,
        });
        t = here;
    }
    Ok(Sequence {
        steps: out,
        range_exhausted: false,
    })
}
