use fatoulab::dynamics::{annulus_bands, default_escape_t, render_escape_grid, OrbitParams, OrbitStatus};

use crate::{exit, write_file, write_json, CliError, Run};

/// Rendering always runs in double precision.
pub fn render(run: &Run) -> Result<i32, CliError> {
    let params = run
        .config
        .render
        .as_ref()
        .ok_or_else(|| CliError::config("render needs a [render] section"))?;
    let built = run
        .config
        .function
        .build::<f64>()
        .map_err(|e| CliError::config(e.to_string()))?;
    let escape_t = params
        .escape_t
        .or_else(|| built.table.as_ref().and_then(default_escape_t))
        .ok_or_else(|| CliError::config("render needs `escape_t` for a series"))?;
    let mut orbit = OrbitParams::new(params.max_steps, escape_t);
    if let Some(t) = &built.table {
        orbit = orbit.with_bands(annulus_bands(t));
    }
    let grid = render_escape_grid(&built.function, params.region, params.width, params.height, &orbit)
        .map_err(|e| CliError::config(e.to_string()))?;
    let mut pgm = Vec::new();
    grid.write_pgm(&mut pgm).expect("in-memory write");
    write_file(&run.file("escape.pgm"), &pgm)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv).map_err(|e| CliError::config(e.to_string()))?;
    write_file(&run.file("escape.csv"), &csv)?;
    let count = |s: OrbitStatus| grid.cells.iter().filter(|c| c.status == s).count();
    let report = serde_json::json!({
        "command": "render",
        "config": run.config.resolved(f64::MANTISSA_DIGITS),
        "escape_t": escape_t,
        "width": grid.width,
        "height": grid.height,
        "counts": {
            "escaped": count(OrbitStatus::Escaped),
            "bounded_window": count(OrbitStatus::BoundedWindow),
            "undecided": count(OrbitStatus::Undecided),
            "overflow": count(OrbitStatus::Overflow),
        },
    });
    write_json(&run.file("render.json"), &report)?;
    Ok(exit::OK)
}
