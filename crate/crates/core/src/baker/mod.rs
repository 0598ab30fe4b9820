//! Baker's product `C prod (1 + (z/r_n)^{k_n})` with radii fixed by the
//! recurrence `r_{n+1} = C prod_{i<=n} (1 + (r_n/r_i)^{k_i})`.

mod io;
mod verify;

pub use io::{read_table, write_table, TableSidecar};
pub use verify::{
    annuli, gap_density_bound, loglog_ratio, verify_forward_invariance, verify_growth_markers,
    verify_loglog_ratio, AnnulusBracket, Annuli, BracketLabel, GapDensityReport, Verdict,
};

use crate::modulus::{BakerProduct, FunctionError, ModulusError};
use crate::scalar::{lift, ln_1p_exp, Real};

/// Largest exponent `build_radii` accepts by default.
pub const DEFAULT_EXPONENT_CAP: u64 = 1 << 62;

/// How `k_n` is chosen.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KRule {
    Explicit { k: Vec<u64> },
    /// `k_n = floor(r_n^lambda)`.
    Lambda { lambda: f64 },
    /// `floor(r_n^lambda)` bumped to the next odd integer when even.
    LambdaOdd { lambda: f64 },
}

impl KRule {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            KRule::Explicit { .. } => None,
            KRule::Lambda { lambda } | KRule::LambdaOdd { lambda } => Some(*lambda),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    Complete,
    /// `k_n` exceeded the cap; radii up to `t_{n+1}` are still known.
    ExponentOverflow { n: usize },
    /// `t_n` left the range where the working precision resolves it.
    LogRadiusOverflow { n: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BakerError {
    #[error("parameter violation: {0}")]
    ParameterViolation(String),
    #[error("k_{n} exceeds the exponent cap")]
    ExponentOverflow { n: usize },
    #[error("t_{n} is beyond the range of the working precision")]
    LogRadiusOverflow { n: usize },
    #[error("k_{n} is even")]
    EvenExponent { n: usize },
    #[error("index {n} needs radii up to t_{needed}, table has {have}")]
    NotEnoughRadii { n: usize, needed: usize, have: usize },
    #[error("A_{n} is empty")]
    EmptyAnnulus { n: usize },
    #[error("precondition failed at n = {n}: {why}")]
    Precondition { n: usize, why: String },
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// Output of [`build_radii`]. Indices are 1-based as in `r_1, r_2, ...`.
///
/// Every radius `t_n` is stored; `k_n` is known for a prefix of them. Radii
/// past that prefix form the frontier.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiiTable<T> {
    c: f64,
    log_c: T,
    rule: KRule,
    log_radii: Vec<T>,
    exponents: Vec<u64>,
    stop: StopReason,
    n0: Option<usize>,
}

/// `floor(e^{lambda t})`, counting values within a few ulps below an
/// integer as that integer. `None` past `cap`.
fn lambda_exponent<T: Real>(lambda: T, t: T, cap: u64) -> Option<u64> {
    let v = (lambda * t).exp();
    if !(v <= T::from_u64(cap)) {
        return None;
    }
    let mut k = v.floor_u64()?;
    let next = T::from_u64(k + 1);
    if next - v <= T::from_u64(16) * T::epsilon() * v {
        k += 1;
    }
    (k <= cap).then_some(k)
}

/// Runs the radii recurrence in the log domain.
///
/// The table holds `n` radii with their exponents plus whatever radii can
/// be computed beyond them (normally `t_{n+1}`). Hitting the exponent cap or
/// the range of `T` ends the run early; the reason is in
/// [`RadiiTable::stop`].
pub fn build_radii<T: Real>(
    c: f64,
    r1: f64,
    rule: &KRule,
    n: usize,
    cap: u64,
) -> Result<RadiiTable<T>, BakerError> {
    let c_max = 1.0 / (4.0 * std::f64::consts::E.powi(2));
    if !(c > 0.0 && c < c_max) {
        return Err(BakerError::ParameterViolation(format!(
            "C = {c} outside (0, 1/(4e^2))"
        )));
    }
    if !(r1 > 2.0) || !r1.is_finite() {
        return Err(BakerError::ParameterViolation(format!("r1 = {r1} must exceed 2")));
    }
    if n < 2 {
        return Err(BakerError::ParameterViolation(format!("N = {n} must be at least 2")));
    }
    match rule {
        KRule::Explicit { k } => {
            if k.len() + 1 < n {
                return Err(BakerError::ParameterViolation(format!(
                    "{} exponents given, N = {n} needs {}",
                    k.len(),
                    n - 1
                )));
            }
            if let Some(i) = k.iter().position(|&x| x == 0) {
                return Err(BakerError::ParameterViolation(format!("k_{} = 0", i + 1)));
            }
        }
        KRule::Lambda { lambda } | KRule::LambdaOdd { lambda } => {
            if !(*lambda > 0.0) || !lambda.is_finite() {
                return Err(BakerError::ParameterViolation(format!(
                    "lambda = {lambda} must be positive"
                )));
            }
        }
    }

    let log_c = lift::<T>(c).ln();
    let lam = rule.lambda().map(lift::<T>);
    let mut t: Vec<T> = vec![lift::<T>(r1).ln()];
    let mut k: Vec<u64> = Vec::with_capacity(n);
    let mut stop = StopReason::Complete;

    for m in 1..=n {
        let km = match rule {
            KRule::Explicit { k: list } => list.get(m - 1).copied(),
            KRule::Lambda { .. } => {
                let v = lambda_exponent(lam.unwrap(), t[m - 1], cap);
                if v.is_none() {
                    stop = StopReason::ExponentOverflow { n: m };
                }
                v
            }
            KRule::LambdaOdd { .. } => {
                let v = lambda_exponent(lam.unwrap(), t[m - 1], cap).map(|x| x | 1);
                if v.is_none_or(|x| x > cap) {
                    stop = StopReason::ExponentOverflow { n: m };
                }
                v.filter(|&x| x <= cap)
            }
        };
        if let Some(x) = km {
            k.push(x);
        }
        // t_{m+1} needs k_1..k_{m-1} only: the i = m factor contributes ln 2.
        let tm = t[m - 1];
        let mut next = log_c + T::ln2();
        for i in 0..m - 1 {
            next = next + ln_1p_exp(T::from_u64(k[i]) * (tm - t[i]));
        }
        if !next.is_finite() || next.abs() * T::epsilon() >= T::one() {
            stop = StopReason::LogRadiusOverflow { n: m + 1 };
            break;
        }
        t.push(next);
        if km.is_none() {
            break;
        }
    }

    let mut table = RadiiTable {
        c,
        log_c,
        rule: rule.clone(),
        log_radii: t,
        exponents: k,
        stop,
        n0: None,
    };
    table.n0 = detect_n0(&table.log_radii);
    Ok(table)
}

/// Smallest `n` with `t_{m+1} - t_m > ln 2` for every computed `m >= n`.
pub fn detect_n0<T: Real>(t: &[T]) -> Option<usize> {
    if t.len() < 2 {
        return None;
    }
    let ln2 = T::ln2();
    let mut first = None;
    for m in (0..t.len() - 1).rev() {
        if t[m + 1] - t[m] > ln2 {
            first = Some(m + 1);
        } else {
            break;
        }
    }
    first
}

impl<T: Real> RadiiTable<T> {
    /// Rebuilds a table from stored values, e.g. an import or a tampered copy.
    pub fn from_parts(
        c: f64,
        rule: KRule,
        log_radii: Vec<T>,
        exponents: Vec<u64>,
        stop: StopReason,
    ) -> Result<Self, BakerError> {
        if exponents.len() > log_radii.len() {
            return Err(BakerError::ParameterViolation(
                "more exponents than radii".into(),
            ));
        }
        if !(c > 0.0) || log_radii.iter().any(|t| !t.is_finite()) {
            return Err(BakerError::ParameterViolation("non-finite or non-positive entry".into()));
        }
        let n0 = detect_n0(&log_radii);
        Ok(RadiiTable {
            c,
            log_c: lift::<T>(c).ln(),
            rule,
            log_radii,
            exponents,
            stop,
            n0,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn log_c(&self) -> T {
        self.log_c
    }

    pub fn rule(&self) -> &KRule {
        &self.rule
    }

    pub fn log_radii(&self) -> &[T] {
        &self.log_radii
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Radii past the known exponents.
    pub fn frontier(&self) -> &[T] {
        &self.log_radii[self.exponents.len()..]
    }

    pub fn stop(&self) -> StopReason {
        self.stop
    }

    pub fn n0(&self) -> Option<usize> {
        self.n0
    }

    /// Number of radii.
    pub fn len(&self) -> usize {
        self.log_radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_radii.is_empty()
    }

    /// `t_n`, 1-based.
    pub fn t(&self, n: usize) -> Option<T> {
        n.checked_sub(1).and_then(|i| self.log_radii.get(i).copied())
    }

    /// `k_n`, 1-based.
    pub fn k(&self, n: usize) -> Option<u64> {
        n.checked_sub(1).and_then(|i| self.exponents.get(i).copied())
    }

    pub fn stop_error(&self) -> Option<BakerError> {
        match self.stop {
            StopReason::Complete => None,
            StopReason::ExponentOverflow { n } => Some(BakerError::ExponentOverflow { n }),
            StopReason::LogRadiusOverflow { n } => Some(BakerError::LogRadiusOverflow { n }),
        }
    }

    fn need(&self, n: usize, needed: usize) -> Result<T, BakerError> {
        self.t(needed).ok_or(BakerError::NotEnoughRadii {
            n,
            needed,
            have: self.len(),
        })
    }

    /// The product over all known exponents. Factors with `k = 0` are the
    /// constant 2 and go into `C`; the first frontier radius bounds the
    /// factors not yet known.
    pub fn to_product(&self, tolerance: T) -> Result<BakerProduct<T>, BakerError> {
        let mut log_c = self.log_c;
        let mut radii = Vec::new();
        let mut exps = Vec::new();
        for (&t, &k) in self.log_radii.iter().zip(&self.exponents) {
            if k == 0 {
                log_c = log_c + T::ln2();
            } else {
                radii.push(t);
                exps.push(k);
            }
        }
        let tail = self.frontier().first().copied();
        Ok(BakerProduct::new(log_c, radii, exps, tail, tolerance)?)
    }
}

#[cfg(test)]
mod tests;
