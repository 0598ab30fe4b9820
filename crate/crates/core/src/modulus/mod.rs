//! Log-domain evaluation of entire functions and their circle extrema.

mod circle;
mod curve;
mod eval;
mod function;

pub use circle::{
    max_modulus, max_modulus_with, min_modulus, min_modulus_with, search_circle, CircleExtremum,
    CircleSearch, Extremum,
};
pub use curve::{fmt_sig17, modulus_curve, CurveSample, ModulusCurve, UniformGrid};
pub use eval::{
    eval_log_modulus, evaluate, log_modulus_lower_bound, log_modulus_upper_bound, truncation_index,
    PointValue,
};
pub use function::{compose_power, BakerProduct, EntireFunction, SeriesTail, SparseSeries};

pub(crate) use eval::zero_floor;

use crate::scalar::Real;

/// `ln|w|` with an explicit marker for `w = 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum LogMagnitude<T> {
    Zero,
    Finite(T),
}

impl<T: Real> LogMagnitude<T> {
    pub fn value(self) -> Option<T> {
        match self {
            LogMagnitude::Zero => None,
            LogMagnitude::Finite(v) => Some(v),
        }
    }

    /// `ln|w|` with `-inf` standing in for zero.
    pub fn ln_or_neg_inf(self) -> T {
        self.value().unwrap_or_else(T::neg_infinity)
    }

    pub fn is_zero(self) -> bool {
        matches!(self, LogMagnitude::Zero)
    }

    pub fn map(self, f: impl FnOnce(T) -> T) -> Self {
        match self {
            LogMagnitude::Zero => LogMagnitude::Zero,
            LogMagnitude::Finite(v) => LogMagnitude::Finite(f(v)),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(self) -> f64 {
        self.ln_or_neg_inf().to_f64()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FunctionError {
    #[error("function has no terms")]
    Empty,
    #[error("coefficient and exponent lists differ in length")]
    LengthMismatch,
    #[error("exponents must be strictly increasing")]
    UnsortedExponents,
    #[error("non-finite parameter")]
    NonFinite,
    #[error("a truncated series needs at least two terms")]
    TooFewTerms,
    #[error("product exponents must be positive")]
    ZeroExponent,
    #[error("power must be positive and keep exponents within u64")]
    ZeroPower,
    #[error("tolerance {0} outside (0, 1)")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModulusError {
    #[error("cancellation exceeds the tolerance; ln|f| <= {log_upper_bound}")]
    PrecisionExhausted { log_upper_bound: f64 },
    #[error("t = {t} is beyond the certified range of the product (max {max})")]
    NotEnoughRadii { t: f64, max: f64 },
    #[error("t = {t} is beyond the certified range of the truncated series (max {max})")]
    OutsideCertifiedRange { t: f64, max: f64 },
    #[error("circle needs a grid of {required} points, above the cap {cap}")]
    GridTooCoarse { required: u64, cap: usize },
    #[error("non-finite argument")]
    NonFinite,
}

impl ModulusError {
    /// Errors that mean `t` lies past what the representation can certify.
    pub fn is_range(&self) -> bool {
        matches!(
            self,
            ModulusError::NotEnoughRadii { .. } | ModulusError::OutsideCertifiedRange { .. }
        )
    }
}
