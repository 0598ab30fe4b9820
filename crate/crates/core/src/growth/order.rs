use rayon::prelude::*;

use super::{log_max, GrowthError};
use crate::modulus::{EntireFunction, SeriesTail, SparseSeries};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct OrderSample {
    pub t: f64,
    pub log_max: f64,
    /// `ln ln M / t`, absent when `ln M <= 1`.
    pub q: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GrowthEstimate {
    pub lambda_hat: f64,
    pub rho_hat: f64,
    /// `t` range of the samples the extremes were taken over.
    pub window: (f64, f64),
    pub samples: Vec<OrderSample>,
}

/// Order and lower order from `q(t) = ln ln M(e^t) / t`: max and min over
/// the last third of the usable samples.
pub fn estimate_order<T: Real>(f: &EntireFunction<T>, ts: &[f64]) -> Result<GrowthEstimate, GrowthError> {
    if ts.len() < 16 {
        return Err(GrowthError::Precondition(format!(
            "{} grid points, need at least 16",
            ts.len()
        )));
    }
    let samples: Vec<OrderSample> = ts
        .par_iter()
        .map(|&t| {
            let lm = log_max(f, T::from_f64(t))?;
            let q = (lm > T::one() && t > 0.0).then(|| lm.ln().to_f64() / t);
            Ok(OrderSample {
                t,
                log_max: lm.to_f64(),
                q,
            })
        })
        .collect::<Result<_, GrowthError>>()?;
    let usable: Vec<&OrderSample> = samples.iter().filter(|s| s.q.is_some()).collect();
    if usable.len() < 8 {
        return Err(GrowthError::RangeTooSmall {
            usable: usable.len(),
        });
    }
    let tail = &usable[usable.len() - usable.len() / 3..];
    let qs = tail.iter().map(|s| s.q.unwrap());
    let lambda_hat = qs.clone().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let rho_hat = qs.fold(f64::INFINITY, f64::min).max(0.0);
    Ok(GrowthEstimate {
        lambda_hat,
        rho_hat,
        window: (tail[0].t, tail[tail.len() - 1].t),
        samples,
    })
}

/// `max j (ln j - 1) / (-ln|a_j|)` over the last third of the terms; `0`
/// for an exact polynomial, `None` below 8 terms.
pub fn coefficient_order_oracle<T: Real>(s: &SparseSeries<T>) -> Option<f64> {
    if s.tail() == SeriesTail::Exact {
        return Some(0.0);
    }
    let terms: Vec<(u64, f64)> = s
        .exponents()
        .iter()
        .zip(s.log_abs())
        .map(|(&j, l)| (j, l.to_f64()))
        .filter(|&(j, _)| j > 0)
        .collect();
    if terms.len() < 8 {
        return None;
    }
    let tail = &terms[terms.len() - terms.len() / 3..];
    tail.iter()
        .filter(|&&(_, l)| l < 0.0)
        .map(|&(j, l)| {
            let j = j as f64;
            j * (j.ln() - 1.0) / -l
        })
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FabryVerdict {
    /// `j_k / k` over the non-constant terms, `k` from 1.
    pub ratios: Vec<f64>,
    pub threshold: f64,
    pub consistent: bool,
}

/// Fabry gaps `j_k / k -> inf`: consistent when the last third of the
/// ratios increases strictly and ends above `threshold`.
pub fn fabry_gap_check<T: Real>(s: &SparseSeries<T>, threshold: f64) -> Result<FabryVerdict, GrowthError> {
    let ratios: Vec<f64> = s
        .exponents()
        .iter()
        .filter(|&&j| j > 0)
        .enumerate()
        .map(|(k, &j)| j as f64 / (k + 1) as f64)
        .collect();
    if ratios.len() < 8 {
        return Err(GrowthError::Precondition(format!(
            "{} terms, need at least 8",
            ratios.len()
        )));
    }
    let tail = &ratios[ratios.len() - ratios.len() / 3 - 1..];
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let consistent = increasing && *ratios.last().unwrap() > threshold;
    Ok(FabryVerdict {
        ratios,
        threshold,
        consistent,
    })
}
