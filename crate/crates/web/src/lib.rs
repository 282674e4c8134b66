//! WebAssembly bindings for the browser demo in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: sle_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Simulates one trace and returns it as SVG markup.
#[wasm_bindgen]
pub fn trace_svg(
    kind: &str,
    parameter: f64,
    kappa: f64,
    steps: usize,
    seed: u64,
) -> Result<String, JsError> {
    let tr = demo::trace(kind, parameter, kappa, steps, seed).map_err(js)?;
    demo::overlay_svg(&[(&tr.points, "black")]).map_err(js)
}

#[wasm_bindgen]
pub struct Dimension {
    pub slope: f64,
    pub r_squared: f64,
    pub scales: usize,
}

/// Box-counting dimension of a freshly simulated trace.
#[wasm_bindgen]
pub fn box_dimension(
    kind: &str,
    parameter: f64,
    kappa: f64,
    steps: usize,
    seed: u64,
) -> Result<Dimension, JsError> {
    let fit = demo::dimension(kind, parameter, kappa, steps, seed).map_err(js)?;
    Ok(Dimension {
        slope: fit.slope,
        r_squared: fit.r_squared,
        scales: fit.scales_used.len(),
    })
}

/// Piecewise-constant driver (grey) against its power interpolation (black).
#[wasm_bindgen]
pub fn interpolation_svg(
    kappa: f64,
    coarse_steps: usize,
    exponent: f64,
    factor: usize,
    seed: u64,
) -> Result<String, JsError> {
    let (held, smooth) =
        demo::interpolated_traces(kappa, coarse_steps, exponent, factor, seed).map_err(js)?;
    demo::overlay_svg(&[(&held, "#aaa"), (&smooth, "black")]).map_err(js)
}
