use rayon::prelude::*;

use super::{log_max, log_min, upper_log_density, DensityEstimate, GrowthError, IntervalSet, MinValue};
use crate::modulus::{EntireFunction, ModulusError, UniformGrid};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CellRecord {
    pub t_a: f64,
    pub t_b: f64,
    pub log_max: f64,
    /// `ln m` at the midpoint, or an upper bound when `min_exact` is false.
    pub log_min: f64,
    pub min_exact: bool,
    /// `ln M <= 0` at the midpoint.
    pub excluded: bool,
    pub marked: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ExceptionalSet {
    pub eps2: f64,
    pub set: IntervalSet,
    pub cells: Vec<CellRecord>,
}

/// Cells of `grid` whose midpoint has `ln m <= eps2 ln M` (with `ln M > 0`),
/// merged into intervals.
pub fn exceptional_set<T: Real>(
    f: &EntireFunction<T>,
    eps2: f64,
    grid: &UniformGrid,
) -> Result<ExceptionalSet, GrowthError> {
    if !(eps2 > 0.0 && eps2 < 1.0) {
        return Err(GrowthError::Precondition(format!("eps2 = {eps2} outside (0, 1)")));
    }
    let edges: Vec<f64> = grid.edges();
    let cells: Vec<CellRecord> = (0..grid.count)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (edges[i], edges[i + 1]);
            let mid = T::from_f64(0.5 * (a + b));
            let big = log_max(f, mid)?;
            let mut rec = CellRecord {
                t_a: a,
                t_b: b,
                log_max: big.to_f64(),
                log_min: f64::NAN,
                min_exact: true,
                excluded: !(big > T::zero()),
                marked: false,
            };
            if rec.excluded {
                return Ok(rec);
            }
            let small = log_min(f, mid)?;
            rec.log_min = small.bound().to_f64();
            rec.min_exact = matches!(small, MinValue::Exact(_));
            let limit = T::from_f64(eps2) * big;
            rec.marked = match small.exceeds(limit) {
                Some(above) => !above,
                None => {
                    return Err(GrowthError::Modulus(ModulusError::PrecisionExhausted {
                        log_upper_bound: rec.log_min,
                    }))
                }
            };
            Ok(rec)
        })
        .collect::<Result<_, GrowthError>>()?;
    let marked: Vec<bool> = cells.iter().map(|c| c.marked).collect();
    Ok(ExceptionalSet {
        eps2,
        set: IntervalSet::from_cells(&edges, &marked),
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DeltaVerdict {
    pub eps1: f64,
    pub consistent: bool,
    pub exceptional: ExceptionalSet,
    pub density: DensityEstimate,
}

/// `upper log dens E(f) <= eps1` on the sampled window. Without explicit
/// windows the positive right cell edges are used.
pub fn delta_membership<T: Real>(
    f: &EntireFunction<T>,
    eps1: f64,
    eps2: f64,
    grid: &UniformGrid,
    windows: Option<&[f64]>,
) -> Result<DeltaVerdict, GrowthError> {
    if !(eps1 > 0.0 && eps1 < 1.0) {
        return Err(GrowthError::Precondition(format!("eps1 = {eps1} outside (0, 1)")));
    }
    let exceptional = exceptional_set(f, eps2, grid)?;
    let default: Vec<f64>;
    let windows = match windows {
        Some(w) => w,
        None => {
            default = grid.edges::<f64>().into_iter().skip(1).filter(|&t| t > 0.0).collect();
            &default
        }
    };
    let density = upper_log_density(&exceptional.set, windows);
    Ok(DeltaVerdict {
        eps1,
        consistent: density.value <= eps1,
        exceptional,
        density,
    })
}
