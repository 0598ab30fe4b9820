//! Orbits in `(ln|z|, arg z)` coordinates, escape classification and
//! annular brackets for Fatou components of Baker-type products.

mod components;
mod orbit;
mod render;


use serde::{Deserialize, Serialize};

use crate::baker::{annuli, RadiiTable};
use crate::modulus::ModulusError;
use crate::scalar::Real;

pub use components::{
    b_ratios, component_ratios, detect_components, hyperbolic_radial_bound,
    strong_uniform_failure_witness, BRatios, ComponentEstimate, ComponentKind, Witness,
};
pub use orbit::{classify_ray, iterate_log, OrbitParams, OrbitRecord, OrbitStatus, RaySample};
pub use render::{render_escape_grid, EscapeGrid, GridCell, Region};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resolution must be at least 1x1")]
    ZeroResolution,
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

/// A labelled band `t_inner <= ln|z| <= t_outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub n: usize,
    pub t_inner: f64,
    pub t_outer: f64,
}

/// The nonempty `A_n` of a table as bands.
pub fn annulus_bands<T: Real>(table: &RadiiTable<T>) -> Vec<Band> {
    annuli(table)
        .a
        .iter()
        .map(|b| Band {
            n: b.n,
            t_inner: b.t_inner.to_f64(),
            t_outer: b.t_outer.to_f64(),
        })
        .collect()
}

/// Twice the first radius whose exponent is unknown, or twice the last one.
pub fn default_escape_t<T: Real>(table: &RadiiTable<T>) -> Option<f64> {
    let t = table
        .frontier()
        .first()
        .or_else(|| table.log_radii().last())?;
    Some(2.0 * t.to_f64())
}
