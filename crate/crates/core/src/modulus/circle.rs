use rayon::prelude::*;

use crate::scalar::Real;

use super::eval::eval_inner;
use super::function::EntireFunction;
use super::{zero_floor, LogMagnitude, ModulusError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Grid and refinement settings for circle searches.
#[derive(Clone, Debug)]
pub struct CircleSearch {
    /// Minimum number of points on the full circle.
    pub grid: usize,
    /// Largest grid the adaptive rule may ask for.
    pub max_grid: usize,
    /// Local extrema refined by golden-section search.
    pub candidates: usize,
    /// Grid points per period of the fastest active term.
    pub oversample: u64,
}

impl Default for CircleSearch {
    fn default() -> Self {
        CircleSearch {
            grid: 4096,
            max_grid: 1 << 22,
            candidates: 3,
            oversample: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleExtremum<T> {
    pub value: LogMagnitude<T>,
    pub theta: T,
    /// Grid size used, `0` when a closed-form direction was used.
    pub grid_points: usize,
}

/// `ln M(e^t, f)`.
pub fn max_modulus<T: Real>(f: &EntireFunction<T>, t: T) -> Result<LogMagnitude<T>, ModulusError> {
    max_modulus_with(f, t, &CircleSearch::default()).map(|e| e.value)
}

/// `ln m(e^t, f)`; [`LogMagnitude::Zero`] when a zero of `f` lies on the
/// circle within tolerance.
pub fn min_modulus<T: Real>(f: &EntireFunction<T>, t: T) -> Result<LogMagnitude<T>, ModulusError> {
    min_modulus_with(f, t, &CircleSearch::default()).map(|e| e.value)
}

pub fn max_modulus_with<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    search: &CircleSearch,
) -> Result<CircleExtremum<T>, ModulusError> {
    if f.max_on_positive_axis() {
        let value = eval_inner(f, t, T::zero(), false)?.log_modulus;
        return Ok(CircleExtremum {
            value,
            theta: T::zero(),
            grid_points: 0,
        });
    }
    search_circle(f, t, Extremum::Max, search)
}

pub fn min_modulus_with<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    search: &CircleSearch,
) -> Result<CircleExtremum<T>, ModulusError> {
    if f.min_on_negative_axis() {
        let value = eval_inner(f, t, T::pi(), false)?.log_modulus;
        return Ok(CircleExtremum {
            value,
            theta: T::pi(),
            grid_points: 0,
        });
    }
    search_circle(f, t, Extremum::Min, search)
}

const SHADOW_TOL: f64 = 1e-9;

enum Stop {
    Zero(f64),
    Fail(ModulusError),
}

/// Grid search on an `f64` copy of `f`, then golden-section refinement of
/// the best local extrema in the working precision. Never takes a
/// closed-form shortcut.
pub fn search_circle<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    which: Extremum,
    search: &CircleSearch,
) -> Result<CircleExtremum<T>, ModulusError> {
    let shadow = f.shadow();
    let t64 = t.to_f64();
    let freq = shadow.angular_frequency(t64).max(1);
    let required = (search.oversample.saturating_mul(freq)).max(search.grid as u64);
    let required = required.checked_next_power_of_two().unwrap_or(u64::MAX);
    if required > search.max_grid as u64 {
        return Err(ModulusError::GridTooCoarse {
            required,
            cap: search.max_grid,
        });
    }
    let n = required as usize;
    // the grid only picks candidates; it needs a tolerance f64 can meet
    let coarse = shadow
        .with_tolerance(shadow.tolerance().max(SHADOW_TOL))
        .map_err(|_| ModulusError::NonFinite)?;
    let symmetric = f.is_conjugate_symmetric();
    // half circle with endpoints when |f| is symmetric under conjugation
    let (count, step) = if symmetric {
        (n / 2 + 1, std::f64::consts::PI / (n / 2) as f64)
    } else {
        (n, std::f64::consts::TAU / n as f64)
    };
    let sign = match which {
        Extremum::Max => 1.0,
        Extremum::Min => -1.0,
    };
    let raw: Vec<(f64, bool)> = (0..count)
        .into_par_iter()
        .map(|j| {
            let theta = j as f64 * step;
            match eval_inner(&coarse, t64, theta, false) {
                Ok(v) => Ok((v.log_modulus.ln_or_neg_inf(), v.log_modulus.is_zero())),
                Err(ModulusError::PrecisionExhausted { log_upper_bound }) => Ok((log_upper_bound, true)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    let mut vals: Vec<f64> = raw.iter().map(|r| r.0).collect();
    // where the shadow ran out of digits (an exhausted bound, or a value lost
    // in rounding) a wider scalar redoes the point
    let wider = T::epsilon().to_f64() < f64::EPSILON;
    // the grid oversamples the fastest term; redone points may be spaced
    // out to `oversample` per period
    let stride = if wider {
        (n as u64 / search.oversample.saturating_mul(freq).max(1)).max(1) as usize
    } else {
        1
    };
    if wider {
        // an upper bound below a resolved value cannot hold the maximum
        let resolved_max = raw
            .iter()
            .filter(|r| !r.1)
            .map(|r| r.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let pick = |j: usize| raw[j].1 && (which == Extremum::Min || raw[j].0 >= resolved_max);
        let on_stride = |j: usize| j % stride == 0 || j + 1 == count;
        let redo: Vec<usize> = (0..count).filter(|&j| pick(j) && on_stride(j)).collect();
        let fixed: Vec<f64> = redo
            .par_iter()
            .map(|&j| match eval_inner(f, t, T::from_f64(j as f64 * step), false) {
                Ok(v) => Ok(v.log_modulus.ln_or_neg_inf().to_f64()),
                Err(ModulusError::PrecisionExhausted { log_upper_bound }) => Ok(log_upper_bound),
                Err(e) => Err(e),
            })
            .collect::<Result<_, _>>()?;
        for (j, v) in redo.into_iter().zip(fixed) {
            vals[j] = v;
        }
        // skipped points take the larger of the redone points around them,
        // so they never look like a minimum themselves
        for j in (0..count).filter(|&j| pick(j) && !on_stride(j)) {
            let a = j - j % stride;
            let b = if a + stride < count {
                a + stride
            } else if symmetric {
                count - 1
            } else {
                0
            };
            vals[j] = vals[a].max(vals[b]);
        }
    }
    let wide = stride > 1 && raw.iter().any(|r| r.1);
    let grid_max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let score: Vec<f64> = vals.iter().map(|v| sign * v).collect();

    let neighbours = |j: usize| -> (usize, usize) {
        if symmetric {
            let prev = if j == 0 { 1 } else { j - 1 };
            let next = if j + 1 == count { count - 2 } else { j + 1 };
            (prev, next)
        } else {
            ((j + count - 1) % count, (j + 1) % count)
        }
    };
    let mut cands: Vec<usize> = (0..count)
        .filter(|&j| {
            let (p, q) = neighbours(j);
            score[j] >= score[p] && score[j] >= score[q]
        })
        .collect();
    cands.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    cands.dedup_by(|a, b| {
        // plateaus give adjacent candidates; keep one per plateau
        let (p, q) = neighbours(*b);
        *a == p || *a == q
    });
    cands.truncate(search.candidates.max(1));
    if cands.is_empty() {
        cands.push(0);
    }

    let tol = f.tolerance().to_f64();
    let xtol = (tol.sqrt() * 0.3 / freq as f64).max(1e-30);
    let refined: Vec<Result<(T, T), Stop>> = cands
        .par_iter()
        .map(|&j| {
            let centre = T::from_f64(j as f64 * step);
            let h = T::from_f64(if wide { step * stride as f64 } else { step });
            refine(f, t, which, centre - h, centre + h, centre, xtol)
        })
        .collect();

    let mut best: Option<(T, T)> = None;
    for r in refined {
        match r {
            Ok((theta, s)) => {
                if best.map_or(true, |(_, b)| s > b) {
                    best = Some((theta, s));
                }
            }
            Err(Stop::Zero(theta)) => {
                if which == Extremum::Min {
                    return Ok(CircleExtremum {
                        value: LogMagnitude::Zero,
                        theta: T::from_f64(theta),
                        grid_points: n,
                    });
                }
            }
            Err(Stop::Fail(e)) => return Err(e),
        }
    }
    let (theta, s) = best.ok_or(ModulusError::NonFinite)?;
    let value = if which == Extremum::Max { s } else { -s };
    if which == Extremum::Min && value.to_f64() < grid_max + zero_floor::<f64>() {
        return Ok(CircleExtremum {
            value: LogMagnitude::Zero,
            theta,
            grid_points: n,
        });
    }
    Ok(CircleExtremum {
        value: LogMagnitude::Finite(value),
        theta,
        grid_points: n,
    })
}

/// Golden-section search for the largest signed value on `[a, b]`.
fn refine<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    which: Extremum,
    mut a: T,
    mut b: T,
    centre: T,
    xtol: f64,
) -> Result<(T, T), Stop> {
    let score = |theta: T| -> Result<T, Stop> {
        match eval_inner(f, t, theta, false) {
            Ok(v) => match v.log_modulus {
                LogMagnitude::Finite(x) => Ok(if which == Extremum::Max { x } else { -x }),
                LogMagnitude::Zero => match which {
                    Extremum::Min => Err(Stop::Zero(theta.to_f64())),
                    Extremum::Max => Ok(T::neg_infinity()),
                },
            },
            Err(e) => Err(Stop::Fail(e)),
        }
    };
    let gr = (T::from_u64(5).sqrt() - T::one()) / T::from_u64(2);
    let width = (b - a).to_f64();
    let iters = ((width / xtol).ln() / 1.618_033_988_749_895f64.ln()).ceil().clamp(0.0, 400.0) as usize;
    let mut best = (centre, score(centre)?);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = score(c)?;
    let mut fd = score(d)?;
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = score(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = score(d)?;
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::function::{BakerProduct, SparseSeries};
    use proptest::prelude::*;

    fn poly(terms: &[(u64, f64)]) -> EntireFunction<f64> {
        SparseSeries::polynomial(terms, 1e-12).unwrap().into()
    }

    #[test]
    fn z_squared_plus_one() {
        let f = poly(&[(0, 1.0), (2, 1.0)]);
        let t = 2f64.ln();
        let m = min_modulus(&f, t).unwrap().value().unwrap();
        let big = max_modulus(&f, t).unwrap().value().unwrap();
        assert!((m - 3f64.ln()).abs() < 1e-10);
        assert!((big - 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn zero_on_unit_circle() {
        let f = poly(&[(0, 1.0), (2, 1.0)]);
        assert!(min_modulus(&f, 0.0).unwrap().is_zero());
        let g = poly(&[(0, 1.0), (1, 1.0)]);
        assert!(min_modulus(&g, 0.0).unwrap().is_zero());
    }

    #[test]
    fn min_of_exp_past_double_precision() {
        // m(20, e^z) = e^{-20} sits 1e17 below the largest term
        let f: EntireFunction<f256::f256> =
            SparseSeries::exp_series(200, f256::f256::from(1e-20)).unwrap().into();
        let t = f256::f256::from(20.0).ln();
        let m = min_modulus(&f, t).unwrap().value().unwrap().to_f64();
        assert!((m + 20.0).abs() < 1e-12, "{m}");
    }

    #[test]
    fn monomial_is_flat() {
        let f = poly(&[(5, 1.0)]);
        let m = min_modulus(&f, 1.5).unwrap().value().unwrap();
        let big = search_circle(&f, 1.5, Extremum::Max, &CircleSearch::default()).unwrap();
        assert!((m - 7.5).abs() < 1e-12);
        assert!((big.value.value().unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn grid_adapts_to_high_frequency() {
        let b: EntireFunction<f64> = BakerProduct::new(0.0, vec![1.0], vec![10_001], None, 1e-9).unwrap().into();
        let e = search_circle(&b, 1.0 - 1e-4, Extremum::Min, &CircleSearch::default()).unwrap();
        assert!(e.grid_points >= 8 * 10_001);
        // min of |1 + w| with |w| = e^{-1.0001} is 1 - |w|
        let x: f64 = -(10_001.0 * 1e-4);
        let expected = (1.0 - x.exp()).ln();
        assert!((e.value.value().unwrap() - expected).abs() < 1e-8);
        let capped = CircleSearch {
            max_grid: 1 << 12,
            ..CircleSearch::default()
        };
        assert!(matches!(
            search_circle(&b, 1.0, Extremum::Min, &capped),
            Err(ModulusError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn complex_coefficients_use_full_circle() {
        // z^2 + i: min at |z|^2 = 2 is 2 - 1 = 1, attained off the real axis
        let s = SparseSeries::from_log_terms(
            vec![0, 2],
            vec![0.0, 0.0],
            vec![std::f64::consts::FRAC_PI_2, 0.0],
            crate::modulus::SeriesTail::Exact,
            1e-12,
        )
        .unwrap();
        let f: EntireFunction<f64> = s.into();
        assert!(!f.is_conjugate_symmetric());
        let t = 2f64.ln() / 2.0;
        let m = min_modulus(&f, t).unwrap().value().unwrap();
        let big = max_modulus(&f, t).unwrap().value().unwrap();
        assert!(m.abs() < 1e-10);
        assert!((big - 3f64.ln()).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn min_below_max_and_points(t in -2.0f64..2.5, theta in 0.0f64..6.28) {
            let f: EntireFunction<f64> = BakerProduct::new(0.02f64.ln(), vec![0.3, 1.2, 2.0], vec![2, 3, 4], None, 1e-10).unwrap().into();
            let lo = min_modulus(&f, t).unwrap();
            let hi = max_modulus(&f, t).unwrap();
            prop_assert!(lo <= hi);
            if let Ok(LogMagnitude::Finite(v)) = crate::modulus::eval_log_modulus(&f, t, theta) {
                prop_assert!(hi.value().unwrap() >= v - 1e-9);
                if let LogMagnitude::Finite(l) = lo {
                    prop_assert!(l <= v + 1e-9);
                }
            }
        }

        #[test]
        fn max_is_increasing(t in -2.0f64..2.0, dt in 0.01f64..1.0) {
            let f = poly(&[(0, 1.0), (1, -3.0), (4, 0.5)]);
            let a = max_modulus(&f, t).unwrap().value().unwrap();
            let b = max_modulus(&f, t + dt).unwrap().value().unwrap();
            prop_assert!(a <= b + 1e-10);
        }
    }
}
