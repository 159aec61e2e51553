//! Browser bindings for the dimer coherence curves.
//!
//! Curves come back as flat `[x0, c0, x1, c1, ...]` arrays so the page can
//! plot them without any glue beyond a `Float64Array`.

use spindimer::models::{coherence, critical_field};
use spindimer::sweep::GridRange;
use spindimer::{Basis, DimerParams};
use wasm_bindgen::prelude::*;

fn basis(perpendicular: bool) -> Basis {
    if perpendicular {
        Basis::Sx
    } else {
        Basis::Sz
    }
}

fn curve(
    range: Result<GridRange, spindimer::Error>,
    mut at: impl FnMut(f64) -> spindimer::Result<DimerParams>,
    basis: Basis,
) -> Result<Vec<f64>, String> {
    let range = range.map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * range.steps);
    for x in range.values() {
        let params = at(x).map_err(|e| e.to_string())?;
        out.push(x);
        out.push(coherence(&params, basis).value);
    }
    Ok(out)
}

/// l1 coherence against temperature at a fixed longitudinal field.
#[wasm_bindgen]
pub fn temperature_curve(
    j_over_kb: f64,
    g: f64,
    b_tesla: f64,
    perpendicular: bool,
    t_min: f64,
    t_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    curve(
        GridRange::new(t_min, t_max, steps),
        |t| DimerParams::new(j_over_kb, g, t, b_tesla),
        basis(perpendicular),
    )
}

/// l1 coherence against longitudinal field at a fixed temperature.
#[wasm_bindgen]
pub fn field_curve(
    j_over_kb: f64,
    g: f64,
    temperature: f64,
    perpendicular: bool,
    b_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    curve(
        GridRange::new(0.0, b_max, steps),
        |b| DimerParams::new(j_over_kb, g, temperature, b),
        basis(perpendicular),
    )
}

/// Level-crossing field in tesla; fails for J >= 0.
#[wasm_bindgen]
pub fn critical_field_tesla(j_over_kb: f64, g: f64) -> Result<f64, String> {
    critical_field(j_over_kb, g)
        .map(|bc| bc.tesla())
        .map_err(|e| e.to_string())
}
