use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{iterate_log, DynamicsError, OrbitParams, OrbitStatus};
use crate::modulus::EntireFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Box {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Columns run over `t = ln|z|`, rows over the angle.
    LogPolar {
        t_min: f64,
        t_max: f64,
        theta_min: f64,
        theta_max: f64,
    },
}

impl Region {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Region::Box {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (x_min, x_max, y_min, y_max),
            Region::LogPolar {
                t_min,
                t_max,
                theta_min,
                theta_max,
            } => (t_min, t_max, theta_min, theta_max),
        }
    }

    /// Pixel centre in region coordinates; row 0 is the top.
    fn coords(&self, row: usize, col: usize, width: usize, height: usize) -> (f64, f64) {
        let (u0, u1, v0, v1) = self.bounds();
        let u = u0 + (col as f64 + 0.5) * (u1 - u0) / width as f64;
        let v = v1 - (row as f64 + 0.5) * (v1 - v0) / height as f64;
        (u, v)
    }

    fn start(&self, u: f64, v: f64) -> (f64, f64) {
        match self {
            Region::Box { .. } => (0.5 * (u * u + v * v).ln(), v.atan2(u)),
            Region::LogPolar { .. } => (u, v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub u: f64,
    pub v: f64,
    pub status: OrbitStatus,
    pub escape_step: Option<usize>,
    /// Annulus indices along the orbit.
    pub bands: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeGrid {
    pub region: Region,
    pub width: usize,
    pub height: usize,
    /// Row-major.
    pub cells: Vec<GridCell>,
}

fn grey(s: OrbitStatus) -> u8 {
    match s {
        OrbitStatus::BoundedWindow => 0,
        OrbitStatus::Escaped => 255,
        OrbitStatus::Undecided | OrbitStatus::Overflow => 128,
    }
}

impl EscapeGrid {
    pub fn cell(&self, row: usize, col: usize) -> &GridCell {
        &self.cells[row * self.width + col]
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "P2")?;
        writeln!(w, "{} {}", self.width, self.height)?;
        writeln!(w, "255")?;
        for row in self.cells.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|c| grey(c.status).to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let (a, b) = match self.region {
            Region::Box { .. } => ("x", "y"),
            Region::LogPolar { .. } => ("t", "theta"),
        };
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["row", "col", a, b, "status", "escape_step"])?;
        for c in &self.cells {
            out.write_record([
                c.row.to_string(),
                c.col.to_string(),
                c.u.to_string(),
                c.v.to_string(),
                c.status.as_str().to_string(),
                c.escape_step.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Escape status of every pixel centre, in double precision.
pub fn render_escape_grid(
    f: &EntireFunction<f64>,
    region: Region,
    width: usize,
    height: usize,
    params: &OrbitParams,
) -> Result<EscapeGrid, DynamicsError> {
    if width == 0 || height == 0 {
        return Err(DynamicsError::ZeroResolution);
    }
    let cells = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let (row, col) = (i / width, i % width);
            let (u, v) = region.coords(row, col, width, height);
            let (t0, th0) = region.start(u, v);
            let (status, escape_step, bands) = match iterate_log(f, t0, th0, params) {
                Ok(r) => (r.status, r.escape_step, r.annulus),
                Err(_) => (OrbitStatus::Undecided, None, vec![]),
            };
            GridCell {
                row,
                col,
                u,
                v,
                status,
                escape_step,
                bands,
            }
        })
        .collect();
    Ok(EscapeGrid {
        region,
        width,
        height,
        cells,
    })
}
