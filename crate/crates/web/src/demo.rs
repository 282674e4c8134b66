//! The demo operations on plain Rust types, so they can be tested natively.

use sle_core::analysis::{box_dimension, DimensionFit, ScaleSpec};
use sle_core::driving::{power_interpolate, sample_bm, DrivingKind, DrivingSpec, Mesh};
use sle_core::splitting::{simulate, split_states, FidelitySchedule, LoewnerDrift, Trace};
use sle_core::{ComplexPoint, Error, Result};

/// Largest step count the page will run; keeps a click under a second.
pub const MAX_STEPS: usize = 1 << 16;

pub fn driving_kind(kind: &str, parameter: f64) -> Result<DrivingKind> {
    let k = match kind {
        "sle" => DrivingKind::StandardBm,
        "nrsle" => DrivingKind::NoiseReinforced { p: parameter },
        "fsle" => DrivingKind::Fractional { hurst: parameter },
        other => return Err(Error::Validation(format!("unknown process {other:?}"))),
    };
    k.validate()?;
    Ok(k)
}

fn check_steps(steps: usize) -> Result<()> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(Error::Validation(format!(
            "steps must be in 1..={MAX_STEPS}"
        )));
    }
    Ok(())
}

pub fn trace(kind: &str, parameter: f64, kappa: f64, steps: usize, seed: u64) -> Result<Trace> {
    check_steps(steps)?;
    let spec = DrivingSpec::new(driving_kind(kind, parameter)?, kappa, seed)?;
    simulate(&spec, &FidelitySchedule::practical(steps, 0.01, 1.0)?)
}

pub fn dimension(
    kind: &str,
    parameter: f64,
    kappa: f64,
    steps: usize,
    seed: u64,
) -> Result<DimensionFit> {
    box_dimension(
        &trace(kind, parameter, kappa, steps, seed)?.points,
        &ScaleSpec::default(),
    )
}

/// Traces driven by a coarse Brownian path held piecewise constant and by
/// its power interpolation onto a mesh `factor` times finer.
pub fn interpolated_traces(
    kappa: f64,
    coarse_steps: usize,
    exponent: f64,
    factor: usize,
    seed: u64,
) -> Result<(Vec<ComplexPoint>, Vec<ComplexPoint>)> {
    check_steps(coarse_steps.saturating_mul(factor))?;
    let z0 = ComplexPoint::new(0.0, 0.01);
    let coarse = sample_bm(&Mesh::uniform(1.0, coarse_steps)?, seed);
    let fine = power_interpolate(&coarse, exponent, factor)?;
    let held = split_states(z0, &coarse.to_force(kappa)?, &LoewnerDrift)?;
    let smooth = split_states(z0, &fine.to_force(kappa)?, &LoewnerDrift)?;
    Ok((held, smooth))
}

/// SVG with one polyline per `(points, colour)` series, y axis up.
pub fn overlay_svg(series: &[(&[ComplexPoint], &str)]) -> Result<String> {
    let all = series.iter().flat_map(|(p, _)| p.iter());
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in all {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if !x0.is_finite() {
        return Err(Error::Degenerate("no points to draw".into()));
    }
    let diag = (x1 - x0).hypot(y1 - y0).max(1e-12);
    let m = 0.05 * diag;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        x0 - m,
        -y1 - m,
        x1 - x0 + 2.0 * m,
        y1 - y0 + 2.0 * m
    );
    for (points, colour) in series {
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"{}\" stroke-linejoin=\"round\" points=\"",
            diag / 600.0
        ));
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&format!("{:.5},{:.5}", p.re, -p.im));
        }
        s.push_str("\"/>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}
