//! Order estimates, exceptional sets and the inequality kernels used along
//! escaping orbits.

mod exceptional;
mod interval;
mod kernels;
mod order;

pub use exceptional::{delta_membership, exceptional_set, CellRecord, DeltaVerdict, ExceptionalSet};
pub use interval::{upper_log_density, DensityEstimate, IntervalSet};
pub use kernels::{
    growth_condition_check, hadamard_convexity_check, hua_yang_sequence, lemma1_crossing_check,
    order_gap_sequence, spike_finder, GrowthCondition, GrowthConditionReport, HuaYangStep,
    Lemma1Verdict, OrderGapStep, Sequence, Spike, SEARCH_GRID,
};
pub use order::{
    coefficient_order_oracle, estimate_order, fabry_gap_check, FabryVerdict, GrowthEstimate,
    OrderSample,
};

use crate::modulus::{max_modulus, min_modulus, EntireFunction, ModulusError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrowthError {
    #[error("only {usable} usable samples, need at least 8")]
    RangeTooSmall { usable: usize },
    #[error("no point satisfies the inequality; best margin {best_margin}")]
    NotFound { best_margin: f64 },
    #[error("hypotheses not met numerically: {0}")]
    HypothesisUnverified(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

/// One line of a verdict report.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OpRecord {
    pub op: String,
    pub params: serde_json::Value,
    pub pass: bool,
    pub margin: Option<f64>,
    pub window: Option<(f64, f64)>,
}

pub(crate) fn log_max<T: Real>(f: &EntireFunction<T>, t: T) -> Result<T, GrowthError> {
    Ok(max_modulus(f, t)?.ln_or_neg_inf())
}

/// `ln m`, or only an upper bound when cancellation hides the value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum MinValue<T> {
    Exact(T),
    AtMost(T),
}

impl<T: Real> MinValue<T> {
    pub fn bound(self) -> T {
        match self {
            MinValue::Exact(v) | MinValue::AtMost(v) => v,
        }
    }

    /// `ln m > target`, or `None` when the bound cannot decide.
    pub fn exceeds(self, target: T) -> Option<bool> {
        match self {
            MinValue::Exact(v) => Some(v > target),
            MinValue::AtMost(u) => (u <= target).then_some(false),
        }
    }
}

pub(crate) fn log_min<T: Real>(f: &EntireFunction<T>, t: T) -> Result<MinValue<T>, GrowthError> {
    match min_modulus(f, t) {
        Ok(v) => Ok(MinValue::Exact(v.ln_or_neg_inf())),
        Err(ModulusError::PrecisionExhausted { log_upper_bound }) => {
            Ok(MinValue::AtMost(T::from_f64(log_upper_bound)))
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests;
