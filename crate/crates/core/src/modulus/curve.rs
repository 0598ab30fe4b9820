use std::io::Write;

use rayon::prelude::*;

use crate::scalar::Real;

use super::circle::{max_modulus, min_modulus};
use super::function::EntireFunction;
use super::{LogMagnitude, ModulusError};

/// `count` equally spaced points on `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Self {
        UniformGrid { t_min, t_max, count }
    }

    pub fn points<T: Real>(&self) -> Vec<T> {
        match self.count {
            0 => vec![],
            1 => vec![T::from_f64(self.t_min)],
            n => {
                let a = T::from_f64(self.t_min);
                let h = (T::from_f64(self.t_max) - a) / T::from_u64(n as u64 - 1);
                (0..n).map(|i| a + h * T::from_u64(i as u64)).collect()
            }
        }
    }

    /// Cell edges for `count` cells.
    pub fn edges<T: Real>(&self) -> Vec<T> {
        UniformGrid::new(self.t_min, self.t_max, self.count + 1).points()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample<T> {
    pub t: T,
    pub log_max: LogMagnitude<T>,
    pub log_min: LogMagnitude<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusCurve<T> {
    pub samples: Vec<CurveSample<T>>,
}

/// `(t, ln M, ln m)` along a grid.
pub fn modulus_curve<T: Real>(f: &EntireFunction<T>, ts: &[T]) -> Result<ModulusCurve<T>, ModulusError> {
    let samples: Result<Vec<_>, _> = ts
        .par_iter()
        .map(|&t| {
            Ok(CurveSample {
                t,
                log_max: max_modulus(f, t)?,
                log_min: min_modulus(f, t)?,
            })
        })
        .collect();
    Ok(ModulusCurve { samples: samples? })
}

/// 17 significant digits; `-inf` marks a zero.
pub fn fmt_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl<T: Real> ModulusCurve<T> {
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "logM", "logm"])?;
        for s in &self.samples {
            out.write_record([
                fmt_sig17(s.t.to_f64()),
                fmt_sig17(s.log_max.to_f64()),
                fmt_sig17(s.log_min.to_f64()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
