//! Function definitions as they appear in experiment files.

use serde::{Deserialize, Serialize};

use crate::baker::{build_radii, BakerError, KRule, RadiiTable, DEFAULT_EXPONENT_CAP};
use crate::modulus::{compose_power, EntireFunction, FunctionError, SeriesTail, SparseSeries};
use crate::scalar::{lift, Real};

/// `re + i im` times `z^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTerm {
    pub exponent: u64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Explicit terms; `truncated` marks them as a prefix of an infinite series.
    Series {
        terms: Vec<SeriesTerm>,
        #[serde(default)]
        truncated: bool,
        tolerance: f64,
    },
    /// `sum_{n < terms} z^n / n!`.
    Exp { terms: usize, tolerance: f64 },
    /// `sum_{n < terms} z^n / (n!)^p`.
    FactorialPower { p: u32, terms: usize, tolerance: f64 },
    Baker {
        #[serde(rename = "C")]
        c: f64,
        r1: f64,
        rule: KRule,
        n: usize,
        tolerance: f64,
        #[serde(default)]
        exponent_cap: Option<u64>,
    },
    /// `f(z^n)` for a series `f`.
    ComposePower { n: u32, base: Box<FunctionSpec> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Baker(#[from] BakerError),
    #[error("{0}")]
    Invalid(String),
}

/// A built function, with its radii table for products.
#[derive(Clone, Debug)]
pub struct Built<T> {
    pub function: EntireFunction<T>,
    pub table: Option<RadiiTable<T>>,
}

impl FunctionSpec {
    pub fn is_baker(&self) -> bool {
        matches!(self, FunctionSpec::Baker { .. })
    }

    pub fn build<T: Real>(&self) -> Result<Built<T>, ConfigError> {
        match self {
            FunctionSpec::Baker {
                c,
                r1,
                rule,
                n,
                tolerance,
                exponent_cap,
            } => {
                let table = build_radii::<T>(*c, *r1, rule, *n, exponent_cap.unwrap_or(DEFAULT_EXPONENT_CAP))?;
                let function = table.to_product(lift(*tolerance))?.into();
                Ok(Built {
                    function,
                    table: Some(table),
                })
            }
            _ => Ok(Built {
                function: self.series::<T>()?.into(),
                table: None,
            }),
        }
    }

    pub fn series<T: Real>(&self) -> Result<SparseSeries<T>, ConfigError> {
        Ok(match self {
            FunctionSpec::Series {
                terms,
                truncated,
                tolerance,
            } => {
                let mut exps = Vec::new();
                let mut logs = Vec::new();
                let mut phases = Vec::new();
                for term in terms {
                    if term.re == 0.0 && term.im == 0.0 {
                        continue;
                    }
                    let (re, im): (T, T) = (lift(term.re), lift(term.im));
                    exps.push(term.exponent);
                    logs.push((re * re + im * im).ln() / T::from_u64(2));
                    phases.push(im.atan2(re));
                }
                let tail = if *truncated {
                    SeriesTail::Truncated
                } else {
                    SeriesTail::Exact
                };
                SparseSeries::from_log_terms(exps, logs, phases, tail, lift(*tolerance))?
            }
            FunctionSpec::Exp { terms, tolerance } => SparseSeries::exp_series(*terms, lift(*tolerance))?,
            FunctionSpec::FactorialPower { p, terms, tolerance } => {
                SparseSeries::factorial_power(*p, *terms, lift(*tolerance))?
            }
            FunctionSpec::ComposePower { n, base } => compose_power(&base.series::<T>()?, *n)?,
            FunctionSpec::Baker { .. } => {
                return Err(ConfigError::Invalid("a product is not a series".into()))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::eval_log_modulus;

    fn parse(s: &str) -> Result<FunctionSpec, serde_json::Error> {
        serde_json::from_str(s)
    }

    #[test]
    fn series_round_trip() {
        let spec = parse(
            r#"{"kind":"series","terms":[{"exponent":0,"re":1.0},{"exponent":1,"re":0.0,"im":1.0}],"tolerance":1e-12}"#,
        )
        .unwrap();
        let f = spec.build::<f64>().unwrap().function;
        // 1 + i z at z = 1: |1 + i| = sqrt 2
        let v = eval_log_modulus(&f, 0.0, 0.0).unwrap().value().unwrap();
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-15);
        let back = parse(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse(r#"{"kind":"exp","terms":10,"tolerance":1e-9,"extra":1}"#).is_err());
        assert!(parse(r#"{"kind":"nope","terms":10,"tolerance":1e-9}"#).is_err());
    }

    #[test]
    fn baker_carries_its_table() {
        let spec = parse(
            r#"{"kind":"baker","C":0.003,"r1":4.0,"rule":{"kind":"lambda","lambda":1.0},"n":12,"tolerance":1e-12}"#,
        )
        .unwrap();
        let b = spec.build::<f64>().unwrap();
        assert_eq!(b.table.unwrap().exponents().len(), 12);
        assert!(spec.series::<f64>().is_err());
        let bad = parse(
            r#"{"kind":"baker","C":0.5,"r1":4.0,"rule":{"kind":"lambda","lambda":1.0},"n":12,"tolerance":1e-12}"#,
        )
        .unwrap();
        assert!(matches!(
            bad.build::<f64>(),
            Err(ConfigError::Baker(BakerError::ParameterViolation(_)))
        ));
    }

    #[test]
    fn composed_exponents() {
        let spec = parse(r#"{"kind":"compose_power","n":3,"base":{"kind":"exp","terms":5,"tolerance":1e-9}}"#)
            .unwrap();
        let s = spec.series::<f64>().unwrap();
        assert_eq!(s.exponents(), &[0, 3, 6, 9, 12]);
    }
}
