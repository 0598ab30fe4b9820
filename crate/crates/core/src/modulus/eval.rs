use crate::scalar::{ln_1p_exp, ln_sum_exp, wrap_angle, Real};

use super::function::{BakerProduct, EntireFunction, SparseSeries};
use super::{LogMagnitude, ModulusError};

/// Value of `f` at a point, in polar log form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValue<T> {
    pub log_modulus: LogMagnitude<T>,
    pub arg: T,
}

impl<T: Real> PointValue<T> {
    fn zero() -> Self {
        PointValue {
            log_modulus: LogMagnitude::Zero,
            arg: T::zero(),
        }
    }
}

/// `ln|f(e^{t + i theta})|`.
///
/// A point where `f` cannot be told apart from zero at working precision
/// yields [`LogMagnitude::Zero`].
pub fn eval_log_modulus<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    theta: T,
) -> Result<LogMagnitude<T>, ModulusError> {
    eval_inner(f, t, theta, false).map(|v| v.log_modulus)
}

/// Like [`eval_log_modulus`] but also returns `arg f`. `t = -inf` is the
/// origin.
pub fn evaluate<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    theta: T,
) -> Result<PointValue<T>, ModulusError> {
    eval_inner(f, t, theta, true)
}

pub(crate) fn eval_inner<T: Real>(
    f: &EntireFunction<T>,
    t: T,
    theta: T,
    want_arg: bool,
) -> Result<PointValue<T>, ModulusError> {
    if t.is_nan() || theta.is_nan() || t == T::infinity() {
        return Err(ModulusError::NonFinite);
    }
    match f {
        EntireFunction::Series(s) => eval_series(s, t, theta, want_arg),
        EntireFunction::Baker(b) => eval_baker(b, t, theta, want_arg),
    }
}

/// Noise floor below which a value counts as zero, relative to the size of
/// the terms that produced it.
pub(crate) fn zero_floor<T: Real>() -> T {
    -(T::from_u64(40) * T::from_u64(10).ln())
}

fn accept<T: Real>(log_mod: T, err: T, tol: T) -> Result<T, ModulusError> {
    let scale = T::one().max(log_mod.abs());
    if err > tol * scale {
        Err(ModulusError::PrecisionExhausted {
            log_upper_bound: (log_mod + err).to_f64(),
        })
    } else {
        Ok(log_mod)
    }
}

fn eval_series<T: Real>(
    s: &SparseSeries<T>,
    t: T,
    theta: T,
    want_arg: bool,
) -> Result<PointValue<T>, ModulusError> {
    if t == T::neg_infinity() {
        return Ok(if s.exponents()[0] == 0 {
            PointValue {
                log_modulus: LogMagnitude::Finite(s.log_abs()[0]),
                arg: s.phase()[0],
            }
        } else {
            PointValue::zero()
        });
    }
    if let Some(max) = s.certified_max_t() {
        if t > max {
            return Err(ModulusError::OutsideCertifiedRange {
                t: t.to_f64(),
                max: max.to_f64(),
            });
        }
    }
    let log_tail = s.log_tail_bound(t).ok_or(ModulusError::OutsideCertifiedRange {
        t: t.to_f64(),
        max: s.certified_max_t().map_or(f64::NAN, |m| m.to_f64()),
    })?;
    let exps = s.exponents();
    let logs = s.log_abs();
    let n = s.len();
    let mut top_idx = 0;
    let mut top = T::neg_infinity();
    let mut rel = Vec::with_capacity(n);
    for k in 0..n {
        let v = logs[k] + T::from_u64(exps[k]) * t;
        if v > top {
            top = v;
            top_idx = k;
        }
        rel.push(v);
    }
    for v in rel.iter_mut() {
        *v = *v - top;
    }
    let eps = T::epsilon();
    let log_tiny = T::from_u64(3) * eps.ln();
    let r = t.exp();
    let ratios = s.ratios();
    // term magnitudes relative to the dominant one, by ratio recurrence from
    // the dominant index outwards
    let mut w = vec![T::zero(); n];
    w[top_idx] = T::one();
    // r^dj for the most common gap
    let gap_pow = {
        let dj = if n > 1 { exps[n - 1] - exps[n - 2] } else { 1 };
        (dj, if dj == 1 { r } else { (T::from_u64(dj) * t).exp() })
    };
    let step = |k: usize| -> Option<T> {
        if ratios[k] == T::zero() {
            return None;
        }
        let dj = exps[k] - exps[k - 1];
        let rp = if dj == 1 {
            r
        } else if dj == gap_pow.0 {
            gap_pow.1
        } else {
            (T::from_u64(dj) * t).exp()
        };
        let st = ratios[k] * rp;
        (st.is_finite() && st > T::zero()).then_some(st)
    };
    for k in top_idx + 1..n {
        if rel[k] < log_tiny {
            continue;
        }
        w[k] = match step(k) {
            Some(st) if w[k - 1] != T::zero() => w[k - 1] * st,
            _ => rel[k].exp(),
        };
    }
    for k in (0..top_idx).rev() {
        if rel[k] < log_tiny {
            continue;
        }
        w[k] = match step(k + 1) {
            Some(st) if w[k + 1] != T::zero() => w[k + 1] / st,
            _ => rel[k].exp(),
        };
    }
    let th = wrap_angle(theta);
    let (s1, c1) = th.sin_cos();
    let units = s.unit_phases();
    let mut re = T::zero();
    let mut im = T::zero();
    let mut total = T::zero();
    let mut angle_err = T::zero();
    let mut rot: Option<(u64, T, T)> = None;
    // rotation by the last exponent gap, reused while the gap repeats
    let mut gap: Option<(u64, T, T)> = None;
    let mut chain = 0u32;
    for k in 0..n {
        if w[k] == T::zero() {
            continue;
        }
        let j = exps[k];
        let (cr, sr) = match (rot, gap) {
            (Some((pj, pc, ps)), _) if j == pj + 1 && chain < 256 => {
                chain += 1;
                (pc * c1 - ps * s1, pc * s1 + ps * c1)
            }
            (Some((pj, pc, ps)), Some((g, gc, gs))) if j == pj + g && chain < 256 => {
                chain += 1;
                (pc * gc - ps * gs, pc * gs + ps * gc)
            }
            (prev, _) => {
                chain = 0;
                if let Some((pj, _, _)) = prev {
                    let g = j - pj;
                    if g > 1 {
                        let (gs, gc) = wrap_angle(T::from_u64(g) * th).sin_cos();
                        gap = Some((g, gc, gs));
                    }
                }
                let (sn, cs) = wrap_angle(T::from_u64(j) * th).sin_cos();
                (cs, sn)
            }
        };
        rot = Some((j, cr, sr));
        let (uc, us) = units[k];
        re = re + w[k] * (cr * uc - sr * us);
        im = im + w[k] * (cr * us + sr * uc);
        total = total + w[k];
        let jj = T::from_u64(j);
        angle_err = angle_err + w[k] * eps * (jj * (th.abs() + t.abs()) + T::from_u64(260));
    }
    let nn = T::from_u64(4 * (n as u64 + 2));
    let err = nn * eps * total + angle_err + (log_tail - top).exp() + T::from_u64(n as u64) * log_tiny.exp();
    let modulus = (re * re + im * im).sqrt();
    if modulus <= err || modulus == T::zero() || modulus.ln() - total.ln() < zero_floor() {
        return Ok(PointValue::zero());
    }
    let log_mod = top + modulus.ln();
    let rel_err = err / (modulus - err);
    let log_mod = accept(log_mod, rel_err, s.tolerance())?;
    Ok(PointValue {
        log_modulus: LogMagnitude::Finite(log_mod),
        arg: if want_arg { im.atan2(re) } else { T::zero() },
    })
}

/// `ln|1 + w|` and friends for `w = e^{x + i phi}`.
pub(crate) struct Factor<T> {
    pub log_abs: T,
    pub arg: T,
    /// `ln(1 + |w|)`.
    pub log_max: T,
    /// Bound on the absolute error of `log_abs`.
    pub err: T,
    /// `|1 + w|` is below its own error bound.
    pub vanishes: bool,
}

pub(crate) fn one_plus<T: Real>(x: T, phi: T, dx: T, dphi: T, want_arg: bool) -> Factor<T> {
    let eps = T::epsilon();
    let tiny = eps * eps;
    let two = T::from_u64(2);
    let four = T::from_u64(4);
    let half = T::one() / two;
    if x <= T::zero() {
        let u = x.exp();
        if u < tiny {
            return Factor {
                log_abs: T::zero(),
                arg: T::zero(),
                log_max: u,
                err: u,
                vanishes: false,
            };
        }
        let (s, c) = phi.sin_cos();
        let log_abs = if u < half {
            half * (u * (two * c + u)).ln_1p()
        } else {
            let e = x.exp_m1();
            let hc = (phi / two).cos();
            half * (e * e + four * u * hc * hc).ln()
        };
        let m = log_abs.exp();
        let spread = u * (dx + dphi);
        Factor {
            log_abs,
            arg: if want_arg { (u * s).atan2(T::one() + u * c) } else { T::zero() },
            log_max: u.ln_1p(),
            err: spread / m + four * eps,
            vanishes: m <= spread + four * eps,
        }
    } else {
        let v = (-x).exp();
        if v < tiny {
            return Factor {
                log_abs: x,
                arg: phi,
                log_max: x,
                err: dx + v + four * eps * (T::one() + x),
                vanishes: false,
            };
        }
        let (s, c) = phi.sin_cos();
        let rest = if v < half {
            half * (v * (two * c + v)).ln_1p()
        } else {
            let e = (-x).exp_m1();
            let hc = (phi / two).cos();
            half * (e * e + four * v * hc * hc).ln()
        };
        let m = rest.exp();
        let spread = dx + dphi;
        Factor {
            log_abs: x + rest,
            arg: if want_arg {
                wrap_angle(phi + (-(v * s)).atan2(T::one() + v * c))
            } else {
                T::zero()
            },
            log_max: x + v.ln_1p(),
            err: spread / m + four * eps * (T::one() + x),
            vanishes: m <= spread + four * eps,
        }
    }
}

/// Index `N` such that the factors after the first `N` stored ones, together
/// with any unstored factors, change `ln|f|` by at most `tol` on `|z| = e^t`.
pub fn truncation_index<T: Real>(f: &BakerProduct<T>, t: T) -> Result<usize, ModulusError> {
    truncation_index_tol(f, t, f.tolerance()).map(|(n, _)| n)
}

/// Returns the index and `ln` of the bound `sum |w|` over dropped factors.
pub(crate) fn truncation_index_tol<T: Real>(
    f: &BakerProduct<T>,
    t: T,
    tol: T,
) -> Result<(usize, T), ModulusError> {
    let unstored = f.log_unstored_bound(t);
    let log_tol = tol.ln();
    if unstored > log_tol {
        return Err(ModulusError::NotEnoughRadii {
            t: t.to_f64(),
            max: f.certified_max_t().map_or(f64::NAN, |m| m.to_f64()),
        });
    }
    let xs: Vec<T> = f
        .exponents()
        .iter()
        .zip(f.log_radii())
        .map(|(k, ti)| T::from_u64(*k) * (t - *ti))
        .collect();
    // walk the suffix while its bound stays within tolerance
    let mut suffix = unstored;
    let mut n = xs.len();
    while n > 0 {
        let next = ln_sum_exp([suffix, xs[n - 1]]);
        if next > log_tol {
            break;
        }
        suffix = next;
        n -= 1;
    }
    Ok((n, suffix))
}

fn eval_baker<T: Real>(
    b: &BakerProduct<T>,
    t: T,
    theta: T,
    want_arg: bool,
) -> Result<PointValue<T>, ModulusError> {
    if t == T::neg_infinity() {
        return Ok(PointValue {
            log_modulus: LogMagnitude::Finite(b.log_c()),
            arg: T::zero(),
        });
    }
    let tol = b.tolerance();
    let (n, dropped) = truncation_index_tol(b, t, tol / T::from_u64(4))?;
    let eps = T::epsilon();
    let mut acc = b.log_c();
    let mut acc_max = b.log_c();
    let mut arg = T::zero();
    let mut err = eps * b.log_c().abs();
    for (k, ti) in b.exponents()[..n].iter().zip(&b.log_radii()[..n]) {
        let kk = T::from_u64(*k);
        let x = kk * (t - *ti);
        let kt = kk * theta;
        let phi = wrap_angle(kt);
        let dx = eps * (kk * (t.abs() + ti.abs()) + x.abs());
        let dphi = eps * (kt.abs() + T::from_u64(4));
        let fac = one_plus(x, phi, dx, dphi, want_arg);
        if fac.vanishes {
            return Ok(PointValue::zero());
        }
        acc = acc + fac.log_abs;
        acc_max = acc_max + fac.log_max;
        arg = wrap_angle(arg + fac.arg);
        err = err + fac.err + eps * acc.abs();
    }
    if acc - acc_max < zero_floor() {
        return Ok(PointValue::zero());
    }
    // dropped factors move ln|f| by at most twice their summed |w|
    err = err + T::from_u64(2) * dropped.exp();
    let log_mod = accept(acc, err, tol)?;
    Ok(PointValue {
        log_modulus: LogMagnitude::Finite(log_mod),
        arg,
    })
}

/// Angle-free lower bound for `ln m(e^t, f)`; `None` when nothing positive
/// can be certified.
pub fn log_modulus_lower_bound<T: Real>(f: &EntireFunction<T>, t: T) -> Option<T> {
    match f {
        EntireFunction::Series(s) => {
            let top = s.log_dominant(t);
            let log_tail = s.log_tail_bound(t)?;
            let mut dom = T::zero();
            let mut rest = (log_tail - top).exp();
            let mut seen = false;
            for (j, l) in s.exponents().iter().zip(s.log_abs()) {
                let w = (*l + T::from_u64(*j) * t - top).exp();
                if !seen && w == T::one() {
                    dom = w;
                    seen = true;
                } else {
                    rest = rest + w;
                }
            }
            let gap = dom - rest * (T::one() + T::from_u64(8) * T::epsilon());
            if gap > T::zero() {
                Some(top + gap.ln())
            } else {
                None
            }
        }
        EntireFunction::Baker(b) => {
            let (n, dropped) = truncation_index_tol(b, t, b.tolerance()).ok()?;
            let mut acc = b.log_c();
            for (k, ti) in b.exponents()[..n].iter().zip(&b.log_radii()[..n]) {
                let x = T::from_u64(*k) * (t - *ti);
                // ln|1 - |w||
                let v = if x < T::zero() {
                    (-x.exp()).ln_1p()
                } else if x > T::zero() {
                    x + (-(-x).exp()).ln_1p()
                } else {
                    return None;
                };
                let slack = T::from_u64(4) * T::epsilon() * (T::one() + x.abs());
                acc = acc + v - slack;
            }
            Some(acc - T::from_u64(2) * dropped.exp())
        }
    }
}

/// Triangle-inequality bound `ln M(e^t, f) <=` the result; `None` past the
/// certified range.
pub fn log_modulus_upper_bound<T: Real>(f: &EntireFunction<T>, t: T) -> Option<T> {
    let slack = T::from_u64(8) * T::epsilon();
    match f {
        EntireFunction::Series(s) => {
            if t == T::neg_infinity() {
                return Some(match s.exponents().first() {
                    Some(0) => s.log_abs()[0],
                    _ => T::neg_infinity(),
                });
            }
            let log_tail = s.log_tail_bound(t)?;
            let terms = s
                .exponents()
                .iter()
                .zip(s.log_abs())
                .map(|(j, l)| *l + T::from_u64(*j) * t);
            let sum = ln_sum_exp(terms.chain(std::iter::once(log_tail)));
            Some(sum + slack)
        }
        EntireFunction::Baker(b) => {
            let (n, dropped) = truncation_index_tol(b, t, b.tolerance()).ok()?;
            let mut acc = b.log_c();
            for (k, ti) in b.exponents()[..n].iter().zip(&b.log_radii()[..n]) {
                let x = T::from_u64(*k) * (t - *ti);
                acc = acc + ln_1p_exp(x) + slack * (T::one() + x.abs());
            }
            Some(acc + T::from_u64(2) * dropped.exp())
        }
    }
}
