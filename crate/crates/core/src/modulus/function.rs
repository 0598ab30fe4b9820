use crate::scalar::{wrap_angle, Real};

use super::FunctionError;

/// How a [`SparseSeries`] relates to the function it represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesTail {
    /// The stored terms are the whole function (a polynomial).
    Exact,
    /// The stored terms are a prefix; the omitted tail is bounded by
    /// extrapolating the ratio of the last two stored coefficients.
    Truncated,
}

/// `sum a_k z^{j_k}` with coefficients stored as `(ln|a_k|, arg a_k)`.
#[derive(Clone, Debug)]
pub struct SparseSeries<T> {
    exponents: Vec<u64>,
    log_abs: Vec<T>,
    phase: Vec<T>,
    tail: SeriesTail,
    tolerance: T,
    certified_max: Option<T>,
    // (cos, sin) of each phase
    unit: Vec<(T, T)>,
    // |a_k / a_{k-1}|, or zero where that is not representable
    ratio: Vec<T>,
}

impl<T: Real> SparseSeries<T> {
    pub fn from_log_terms(
        exponents: Vec<u64>,
        log_abs: Vec<T>,
        phase: Vec<T>,
        tail: SeriesTail,
        tolerance: T,
    ) -> Result<Self, FunctionError> {
        if exponents.is_empty() {
            return Err(FunctionError::Empty);
        }
        if exponents.len() != log_abs.len() || exponents.len() != phase.len() {
            return Err(FunctionError::LengthMismatch);
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FunctionError::UnsortedExponents);
        }
        if log_abs.iter().chain(&phase).any(|x| !x.is_finite()) {
            return Err(FunctionError::NonFinite);
        }
        check_tolerance(tolerance)?;
        if tail == SeriesTail::Truncated && exponents.len() < 2 {
            return Err(FunctionError::TooFewTerms);
        }
        let phase: Vec<T> = phase.into_iter().map(wrap_angle).collect();
        let unit = phase.iter().map(|p| {
            let (sn, cs) = p.sin_cos();
            (cs, sn)
        }).collect();
        let ratio = coefficient_ratios(&log_abs);
        let mut s = SparseSeries {
            exponents,
            log_abs,
            phase,
            tail,
            tolerance,
            certified_max: None,
            unit,
            ratio,
        };
        s.certified_max = s.compute_certified_max();
        Ok(s)
    }

    /// Series with real coefficients; zero coefficients are dropped.
    pub fn from_real(
        terms: &[(u64, f64)],
        tail: SeriesTail,
        tolerance: T,
    ) -> Result<Self, FunctionError> {
        let mut exps = Vec::new();
        let mut logs = Vec::new();
        let mut phases = Vec::new();
        for &(j, a) in terms {
            if a == 0.0 {
                continue;
            }
            if !a.is_finite() {
                return Err(FunctionError::NonFinite);
            }
            exps.push(j);
            logs.push(T::from_f64(a.abs()).ln());
            phases.push(if a < 0.0 { T::pi() } else { T::zero() });
        }
        Self::from_log_terms(exps, logs, phases, tail, tolerance)
    }

    pub fn polynomial(terms: &[(u64, f64)], tolerance: T) -> Result<Self, FunctionError> {
        Self::from_real(terms, SeriesTail::Exact, tolerance)
    }

    /// `sum_{n < terms} z^n / (n!)^p`.
    pub fn factorial_power(p: u32, terms: usize, tolerance: T) -> Result<Self, FunctionError> {
        let mut logs = Vec::with_capacity(terms);
        let mut acc = T::zero();
        for n in 0..terms as u64 {
            if n >= 2 {
                acc = acc + T::from_u64(n).ln();
            }
            logs.push(-(T::from_u64(p as u64) * acc));
        }
        let exps = (0..terms as u64).collect();
        Self::from_log_terms(
            exps,
            logs,
            vec![T::zero(); terms],
            SeriesTail::Truncated,
            tolerance,
        )
    }

    /// Taylor prefix of `e^z`.
    pub fn exp_series(terms: usize, tolerance: T) -> Result<Self, FunctionError> {
        Self::factorial_power(1, terms, tolerance)
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn log_abs(&self) -> &[T] {
        &self.log_abs
    }

    pub fn phase(&self) -> &[T] {
        &self.phase
    }

    pub(crate) fn unit_phases(&self) -> &[(T, T)] {
        &self.unit
    }

    pub(crate) fn ratios(&self) -> &[T] {
        &self.ratio
    }

    pub fn tail(&self) -> SeriesTail {
        self.tail
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn with_tolerance(&self, tolerance: T) -> Result<Self, FunctionError> {
        check_tolerance(tolerance)?;
        let mut s = self.clone();
        s.tolerance = tolerance;
        s.certified_max = s.compute_certified_max();
        Ok(s)
    }

    /// Largest `t` where the tail bound stays below a tenth of the tolerance
    /// relative to the dominant term. `None` means unbounded.
    pub fn certified_max_t(&self) -> Option<T> {
        self.certified_max
    }

    fn tail_slope(&self) -> Option<T> {
        if self.tail == SeriesTail::Exact {
            return None;
        }
        let k = self.len() - 1;
        let dj = T::from_u64(self.exponents[k] - self.exponents[k - 1]);
        Some((self.log_abs[k] - self.log_abs[k - 1]) / dj)
    }

    /// `ln` of a bound on the omitted tail at `|z| = e^t`; `Some(-inf)` for
    /// an exact series and `None` when the extrapolated ratio is not `< 1`.
    pub fn log_tail_bound(&self, t: T) -> Option<T> {
        let slope = match self.tail_slope() {
            None => return Some(T::neg_infinity()),
            Some(s) => s,
        };
        let rho = slope + t;
        if rho >= T::zero() {
            return None;
        }
        let k = self.len() - 1;
        let last = self.log_abs[k] + T::from_u64(self.exponents[k]) * t;
        Some(last + rho - (-rho.exp_m1()).ln())
    }

    /// `max_k (ln|a_k| + j_k t)`.
    pub fn log_dominant(&self, t: T) -> T {
        let mut best = T::neg_infinity();
        for (j, l) in self.exponents.iter().zip(&self.log_abs) {
            best = best.max(*l + T::from_u64(*j) * t);
        }
        best
    }

    fn tail_excess(&self, t: T) -> Option<T> {
        self.log_tail_bound(t).map(|b| b - self.log_dominant(t))
    }

    fn compute_certified_max(&self) -> Option<T> {
        let slope = self.tail_slope()?;
        let target = self.tolerance.ln() - T::from_u64(10).ln();
        let ok = |t: T| matches!(self.tail_excess(t), Some(x) if x <= target);
        let mut hi = -slope;
        let mut step = T::one();
        let mut lo = hi - step;
        let mut tries = 0;
        while !ok(lo) {
            step = step + step;
            lo = hi - step;
            tries += 1;
            if tries > 200 {
                return Some(T::neg_infinity());
            }
        }
        for _ in 0..(T::MANTISSA_BITS + 16) {
            let mid = (lo + hi) / T::from_u64(2);
            if mid <= lo || mid >= hi {
                break;
            }
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    /// Coefficients are all real and positive.
    pub fn is_positive(&self) -> bool {
        self.phase.iter().all(|p| *p == T::zero())
    }

    /// Coefficients are all real.
    pub fn is_real(&self) -> bool {
        self.phase
            .iter()
            .all(|p| *p == T::zero() || *p == T::pi())
    }

    pub fn shadow(&self) -> SparseSeries<f64> {
        SparseSeries {
            exponents: self.exponents.clone(),
            log_abs: self.log_abs.iter().map(|x| x.to_f64()).collect(),
            phase: self.phase.iter().map(|x| x.to_f64()).collect(),
            tail: self.tail,
            tolerance: self.tolerance.to_f64(),
            certified_max: self.certified_max.map(|x| x.to_f64()),
            unit: self.unit.iter().map(|(c, s)| (c.to_f64(), s.to_f64())).collect(),
            ratio: coefficient_ratios(&self.log_abs.iter().map(|x| x.to_f64()).collect::<Vec<_>>()),
        }
    }
}

/// `C prod (1 + (z/r_i)^{k_i})` with `C > 0` and every `k_i >= 1`.
///
/// Factors beyond the stored ones are allowed to exist when
/// `tail_log_radius` is set: they are assumed to start at that log-radius
/// and to have radii at least doubling from there on.
#[derive(Clone, Debug)]
pub struct BakerProduct<T> {
    log_c: T,
    log_radii: Vec<T>,
    exponents: Vec<u64>,
    tail_log_radius: Option<T>,
    tolerance: T,
}

impl<T: Real> BakerProduct<T> {
    pub fn new(
        log_c: T,
        log_radii: Vec<T>,
        exponents: Vec<u64>,
        tail_log_radius: Option<T>,
        tolerance: T,
    ) -> Result<Self, FunctionError> {
        if log_radii.len() != exponents.len() {
            return Err(FunctionError::LengthMismatch);
        }
        if exponents.iter().any(|&k| k == 0) {
            return Err(FunctionError::ZeroExponent);
        }
        if !log_c.is_finite()
            || log_radii.iter().any(|t| !t.is_finite())
            || tail_log_radius.is_some_and(|t| !t.is_finite())
        {
            return Err(FunctionError::NonFinite);
        }
        check_tolerance(tolerance)?;
        Ok(BakerProduct {
            log_c,
            log_radii,
            exponents,
            tail_log_radius,
            tolerance,
        })
    }

    pub fn log_c(&self) -> T {
        self.log_c
    }

    pub fn log_radii(&self) -> &[T] {
        &self.log_radii
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn tail_log_radius(&self) -> Option<T> {
        self.tail_log_radius
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn all_odd(&self) -> bool {
        self.exponents.iter().all(|k| k % 2 == 1)
    }

    pub fn with_tolerance(&self, tolerance: T) -> Result<Self, FunctionError> {
        check_tolerance(tolerance)?;
        let mut b = self.clone();
        b.tolerance = tolerance;
        Ok(b)
    }

    /// Largest `t` at which the unstored tail stays within an eighth of the
    /// tolerance.
    pub fn certified_max_t(&self) -> Option<T> {
        self.tail_log_radius
            .map(|s| s + (self.tolerance / T::from_u64(8)).ln())
    }

    /// `ln` of the bound `sum |w|` over unstored factors at `|z| = e^t`.
    pub fn log_unstored_bound(&self, t: T) -> T {
        match self.tail_log_radius {
            None => T::neg_infinity(),
            Some(s) => T::ln2() + t - s,
        }
    }

    pub fn shadow(&self) -> BakerProduct<f64> {
        BakerProduct {
            log_c: self.log_c.to_f64(),
            log_radii: self.log_radii.iter().map(|x| x.to_f64()).collect(),
            exponents: self.exponents.clone(),
            tail_log_radius: self.tail_log_radius.map(|x| x.to_f64()),
            tolerance: self.tolerance.to_f64(),
        }
    }
}

/// An entire function in one of the supported representations.
#[derive(Clone, Debug)]
pub enum EntireFunction<T> {
    Series(SparseSeries<T>),
    Baker(BakerProduct<T>),
}

impl<T: Real> From<SparseSeries<T>> for EntireFunction<T> {
    fn from(s: SparseSeries<T>) -> Self {
        EntireFunction::Series(s)
    }
}

impl<T: Real> From<BakerProduct<T>> for EntireFunction<T> {
    fn from(b: BakerProduct<T>) -> Self {
        EntireFunction::Baker(b)
    }
}

impl<T: Real> EntireFunction<T> {
    pub fn tolerance(&self) -> T {
        match self {
            EntireFunction::Series(s) => s.tolerance(),
            EntireFunction::Baker(b) => b.tolerance(),
        }
    }

    pub fn with_tolerance(&self, tolerance: T) -> Result<Self, FunctionError> {
        Ok(match self {
            EntireFunction::Series(s) => EntireFunction::Series(s.with_tolerance(tolerance)?),
            EntireFunction::Baker(b) => EntireFunction::Baker(b.with_tolerance(tolerance)?),
        })
    }

    /// Upper end of the range of `t` where values are certified.
    pub fn certified_max_t(&self) -> Option<T> {
        match self {
            EntireFunction::Series(s) => s.certified_max_t(),
            EntireFunction::Baker(b) => b.certified_max_t(),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        match self {
            EntireFunction::Series(s) => s.tail() == SeriesTail::Exact,
            EntireFunction::Baker(b) => b.tail_log_radius().is_none(),
        }
    }

    /// `M(r) = |f(r)|`: every coefficient or factor is positive on the
    /// positive real axis.
    pub fn max_on_positive_axis(&self) -> bool {
        match self {
            EntireFunction::Series(s) => s.is_positive(),
            EntireFunction::Baker(_) => true,
        }
    }

    /// `m(r) = |f(-r)|` holds provably.
    pub fn min_on_negative_axis(&self) -> bool {
        match self {
            EntireFunction::Series(s) => {
                if !s.is_positive() {
                    return false;
                }
                match s.exponents() {
                    [_] => true,
                    [a, b] => (b - a) % 2 == 1,
                    _ => false,
                }
            }
            EntireFunction::Baker(b) => b.all_odd(),
        }
    }

    /// `|f(conj z)| = |f(z)|`.
    pub fn is_conjugate_symmetric(&self) -> bool {
        match self {
            EntireFunction::Series(s) => s.is_real(),
            EntireFunction::Baker(_) => true,
        }
    }

    pub fn shadow(&self) -> EntireFunction<f64> {
        match self {
            EntireFunction::Series(s) => EntireFunction::Series(s.shadow()),
            EntireFunction::Baker(b) => EntireFunction::Baker(b.shadow()),
        }
    }

    /// Bound on the angular frequency of `ln|f|` on `|z| = e^t`;
    /// terms or factors below the tolerance are ignored.
    pub fn angular_frequency(&self, t: T) -> u64 {
        let cut = (T::from_u64(40) / self.tolerance()).ln();
        match self {
            EntireFunction::Series(s) => {
                let top = s.log_dominant(t);
                let floor = top - cut - T::from_u64(s.len() as u64).ln();
                let mut freq = 0;
                for (j, l) in s.exponents().iter().zip(s.log_abs()) {
                    if *l + T::from_u64(*j) * t >= floor {
                        freq = freq.max(*j);
                    }
                }
                freq
            }
            EntireFunction::Baker(b) => {
                let mut freq = 0;
                for (k, ti) in b.exponents().iter().zip(b.log_radii()) {
                    let x = T::from_u64(*k) * (t - *ti);
                    if x.abs() <= cut {
                        freq = freq.max(*k);
                    }
                }
                freq
            }
        }
    }
}

/// `f(z^n)`: the same coefficients on exponents scaled by `n`.
pub fn compose_power<T: Real>(f: &SparseSeries<T>, n: u32) -> Result<SparseSeries<T>, FunctionError> {
    if n == 0 {
        return Err(FunctionError::ZeroPower);
    }
    let exps = f
        .exponents()
        .iter()
        .map(|j| j.checked_mul(n as u64).ok_or(FunctionError::ZeroPower))
        .collect::<Result<Vec<_>, _>>()?;
    SparseSeries::from_log_terms(exps, f.log_abs().to_vec(), f.phase().to_vec(), f.tail(), f.tolerance())
}

fn coefficient_ratios<T: Real>(log_abs: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); log_abs.len()];
    for k in 1..log_abs.len() {
        let q = (log_abs[k] - log_abs[k - 1]).exp();
        if q.is_finite() && q > T::epsilon() * T::epsilon() && q < T::one() / (T::epsilon() * T::epsilon()) {
            out[k] = q;
        }
    }
    out
}

fn check_tolerance<T: Real>(tol: T) -> Result<(), FunctionError> {
    if tol > T::zero() && tol < T::one() {
        Ok(())
    } else {
        Err(FunctionError::BadTolerance(tol.to_f64()))
    }
}
