use std::io::{Read, Write};

use super::{BakerError, KRule, RadiiTable, StopReason};
use crate::scalar::Real;

/// JSON metadata written next to the `n,t_n,k_n` table.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSidecar {
    #[serde(rename = "C")]
    pub c: f64,
    pub lambda: Option<f64>,
    pub rule: KRule,
    pub precision_bits: u32,
    pub n0_detected: Option<usize>,
    pub stop: StopReason,
}

impl TableSidecar {
    pub fn of<T: Real>(table: &RadiiTable<T>, precision_bits: u32) -> Self {
        TableSidecar {
            c: table.c(),
            lambda: table.rule().lambda(),
            rule: table.rule().clone(),
            precision_bits,
            n0_detected: table.n0(),
            stop: table.stop(),
        }
    }
}

/// Radii are written at full working precision so a read restores them
/// exactly; frontier rows leave `k_n` empty.
pub fn write_table<T: Real, W: Write>(
    table: &RadiiTable<T>,
    w: W,
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "t_n", "k_n"])?;
    for (i, t) in table.log_radii().iter().enumerate() {
        let k = table.k(i + 1).map(|k| k.to_string()).unwrap_or_default();
        out.write_record([(i + 1).to_string(), t.to_string(), k])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table<T: Real, R: Read>(r: R, sidecar: &TableSidecar) -> Result<RadiiTable<T>, BakerError> {
    let bad = |msg: String| BakerError::ParameterViolation(msg);
    let mut rd = csv::Reader::from_reader(r);
    let mut t = Vec::new();
    let mut k = Vec::new();
    let mut in_frontier = false;
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(format!("row {}: expected 3 fields", row + 1)));
        }
        let n: usize = rec[0].parse().map_err(|_| bad(format!("row {}: bad n", row + 1)))?;
        if n != row + 1 {
            return Err(bad(format!("row {}: n = {n} out of sequence", row + 1)));
        }
        t.push(T::parse_decimal(&rec[1]).ok_or_else(|| bad(format!("row {n}: bad t_n")))?);
        if rec[2].trim().is_empty() {
            in_frontier = true;
        } else if in_frontier {
            return Err(bad(format!("row {n}: k_n after the frontier")));
        } else {
            k.push(rec[2].trim().parse().map_err(|_| bad(format!("row {n}: bad k_n")))?);
        }
    }
    RadiiTable::from_parts(sidecar.c, sidecar.rule.clone(), t, k, sidecar.stop)
}
