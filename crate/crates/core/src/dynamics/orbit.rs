use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Band;
use crate::modulus::{
    evaluate, log_modulus_lower_bound, log_modulus_upper_bound, EntireFunction, LogMagnitude,
    ModulusError,
};
use crate::scalar::{wrap_angle, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStatus {
    Escaped,
    BoundedWindow,
    Undecided,
    Overflow,
}

impl OrbitStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OrbitStatus::Escaped => "escaped",
            OrbitStatus::BoundedWindow => "bounded_window",
            OrbitStatus::Undecided => "undecided",
            OrbitStatus::Overflow => "overflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitParams {
    pub max_steps: usize,
    pub escape_t: f64,
    /// Above this log-magnitude only angle-free bounds are used.
    pub safe_t: f64,
    /// Accumulated angle uncertainty (radians) at which the angle is dropped.
    pub angle_tol: f64,
    pub bands: Vec<Band>,
}

impl OrbitParams {
    pub fn new(max_steps: usize, escape_t: f64) -> Self {
        OrbitParams {
            max_steps,
            escape_t,
            safe_t: 500.0,
            angle_tol: 1e-2,
            bands: Vec::new(),
        }
    }

    pub fn with_bands(mut self, bands: Vec<Band>) -> Self {
        self.bands = bands;
        self
    }

    fn band_of(&self, t: f64) -> Option<usize> {
        self.bands
            .iter()
            .find(|b| b.t_inner <= t && t <= b.t_outer)
            .map(|b| b.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub t0: f64,
    pub theta0: f64,
    /// `ln|f^k(z)|` for `k = 0..`; `-inf` is the origin.
    pub ts: Vec<f64>,
    pub annulus: Vec<Option<usize>>,
    pub status: OrbitStatus,
    pub escape_step: Option<usize>,
    /// First index of `ts` that is only an upper bound.
    pub upper_from: Option<usize>,
    pub note: Option<String>,
}

impl OrbitRecord {
    /// Annulus indices after the start, plus the terminal status.
    pub fn signature(&self) -> (Vec<Option<usize>>, OrbitStatus) {
        (self.annulus[1..].to_vec(), self.status)
    }
}

enum Step<T> {
    Next(T, Option<T>),
    /// Only `ln|f^{k+1}(z)| <= u` is known from here on.
    Upper(T),
    Stop(OrbitStatus, String),
}

/// Without the angle: escape if even `m(r)` clears the threshold, otherwise
/// follow `M(r)`, which is increasing in `r`.
fn angle_free_step<T: Real>(f: &EntireFunction<T>, t: T, escape: T, why: &str) -> Step<T> {
    if let Some(lb) = log_modulus_lower_bound(f, t) {
        if lb > escape {
            return Step::Next(lb, None);
        }
    }
    match log_modulus_upper_bound(f, t) {
        Some(u) => Step::Upper(u),
        None => Step::Stop(OrbitStatus::Undecided, why.to_string()),
    }
}

/// Orbit of `z = e^{t0 + i theta0}` in `(ln|z|, arg z)` coordinates.
///
/// While the angle is tracked each step is a full evaluation. Once it is
/// lost, or above `safe_t`, escape is certified from the minimum modulus
/// and staying below the threshold from the maximum modulus; `ts` then holds
/// upper bounds. Fails only when the start itself lies past the certified
/// range below the escape threshold.
pub fn iterate_log<T: Real>(
    f: &EntireFunction<T>,
    t0: T,
    theta0: T,
    params: &OrbitParams,
) -> Result<OrbitRecord, ModulusError> {
    if t0.is_nan() || theta0.is_nan() || t0 == T::infinity() {
        return Err(ModulusError::NonFinite);
    }
    let escape = T::from_f64(params.escape_t);
    if t0 <= escape {
        if let Some(max) = f.certified_max_t() {
            if t0 > max {
                return Err(ModulusError::NotEnoughRadii {
                    t: t0.to_f64(),
                    max: max.to_f64(),
                });
            }
        }
    }
    let safe = T::from_f64(params.safe_t);
    let tol = f.tolerance();
    let mut rec = OrbitRecord {
        t0: t0.to_f64(),
        theta0: theta0.to_f64(),
        ts: vec![t0.to_f64()],
        annulus: vec![params.band_of(t0.to_f64())],
        status: OrbitStatus::BoundedWindow,
        escape_step: None,
        upper_from: None,
        note: None,
    };
    let mut t = t0;
    let mut theta = Some(wrap_angle(theta0));
    let mut angle_err = T::epsilon() * (T::one() + theta0.abs());
    for step in 0..=params.max_steps {
        let upper = rec.upper_from.is_some();
        if t > escape {
            if upper {
                rec.status = OrbitStatus::Undecided;
                rec.note = Some("upper bound crossed the threshold".into());
            } else {
                rec.status = OrbitStatus::Escaped;
                rec.escape_step = Some(step);
            }
            return Ok(rec);
        }
        if step == params.max_steps {
            break;
        }
        if t == T::neg_infinity() && (upper || theta.is_none()) {
            match log_modulus_upper_bound(f, t) {
                Some(u) if u == T::neg_infinity() => {
                    rec.note = Some("fixed at the origin".into());
                    break;
                }
                _ => {}
            }
        }
        let outcome = if upper {
            match log_modulus_upper_bound(f, t) {
                Some(u) => Step::Upper(u),
                None => Step::Stop(OrbitStatus::Undecided, "upper bound out of range".into()),
            }
        } else {
            match theta {
                Some(th) if t <= safe => match evaluate(f, t, th) {
                    Ok(v) => match v.log_modulus {
                        LogMagnitude::Zero => {
                            if t == T::neg_infinity() {
                                rec.note = Some("fixed at the origin".into());
                                break;
                            }
                            Step::Next(T::neg_infinity(), Some(T::zero()))
                        }
                        LogMagnitude::Finite(l) => {
                            angle_err = if t == T::neg_infinity() {
                                tol
                            } else {
                                T::from_u64(f.angular_frequency(t).max(1)) * angle_err + tol
                            };
                            let keep = angle_err.to_f64() <= params.angle_tol;
                            Step::Next(l, keep.then_some(v.arg))
                        }
                    },
                    Err(ModulusError::NonFinite) => {
                        Step::Stop(OrbitStatus::Overflow, "non-finite value".into())
                    }
                    Err(e) => angle_free_step(f, t, escape, &e.to_string()),
                },
                Some(_) => angle_free_step(f, t, escape, "above the safe threshold"),
                None => angle_free_step(f, t, escape, "angle lost"),
            }
        };
        let next = match outcome {
            Step::Next(next, th) => {
                theta = th;
                next
            }
            Step::Upper(u) => {
                theta = None;
                rec.upper_from.get_or_insert(step + 1);
                u
            }
            Step::Stop(status, why) => {
                rec.status = status;
                rec.note = Some(why);
                return Ok(rec);
            }
        };
        if next.is_nan() || next == T::infinity() {
            rec.status = OrbitStatus::Overflow;
            rec.note = Some("log-magnitude overflow".into());
            return Ok(rec);
        }
        t = next;
        rec.ts.push(t.to_f64());
        rec.annulus.push(params.band_of(t.to_f64()));
    }
    rec.status = OrbitStatus::BoundedWindow;
    Ok(rec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub t: f64,
    pub status: OrbitStatus,
    pub escape_step: Option<usize>,
    pub signature: Vec<Option<usize>>,
}

/// [`iterate_log`] along a ray; a start outside the certified range is
/// reported as undecided.
pub fn classify_ray<T: Real>(
    f: &EntireFunction<T>,
    theta: T,
    ts: &[T],
    params: &OrbitParams,
) -> Vec<RaySample> {
    ts.par_iter()
        .map(|&t| match iterate_log(f, t, theta, params) {
            Ok(rec) => RaySample {
                t: t.to_f64(),
                status: rec.status,
                escape_step: rec.escape_step,
                signature: rec.signature().0,
            },
            Err(_) => RaySample {
                t: t.to_f64(),
                status: OrbitStatus::Undecided,
                escape_step: None,
                signature: vec![],
            },
        })
        .collect()
}
