use crate::splitting::Trace;
use crate::{ComplexPoint, Error, Result};

fn check_horizons(a: &Trace, b: &Trace) -> Result<()> {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    if !close(a.times[0], b.times[0]) || !close(a.horizon(), b.horizon()) {
        return Err(Error::HorizonMismatch(a.horizon(), b.horizon()));
    }
    Ok(())
}

fn interpolate(tr: &Trace, j: usize, t: f64) -> ComplexPoint {
    // j is the index of the last knot <= t
    if j + 1 >= tr.len() || tr.times[j] == t {
        return tr.points[j];
    }
    let (t0, t1) = (tr.times[j], tr.times[j + 1]);
    let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    tr.points[j] + (tr.points[j + 1] - tr.points[j]) * s
}

/// `(t, a(t) - b(t))` on the union of both meshes, points interpolated
/// linearly between knots.
fn differences(a: &Trace, b: &Trace) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0usize, 0usize);
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut t = a.times[0];
    loop {
        out.push((t, (interpolate(a, i, t) - interpolate(b, j, t)).norm()));
        let next_a = a.times.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let next_b = b.times.get(j + 1).copied().unwrap_or(f64::INFINITY);
        let next = next_a.min(next_b);
        if next == f64::INFINITY {
            break;
        }
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
        t = next;
    }
    // the final knots may differ by rounding; compare the last points directly
    let last = out.last_mut().unwrap();
    last.1 = (a.last() - b.last()).norm();
    out
}

/// Largest pointwise distance over the union mesh.
pub fn sup_distance(a: &Trace, b: &Trace) -> Result<f64> {
    check_horizons(a, b)?;
    Ok(differences(a, b).iter().fold(0.0f64, |m, &(_, d)| m.max(d)))
}

/// `(integral |a - b|^p dt)^(1/p)` by the trapezoid rule on the union mesh, for `p >= 2`.
pub fn lp_distance(a: &Trace, b: &Trace, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::validation(
            "L^p distance needs p >= 2 (use the relaxed variant for 1 <= p < 2)",
        ));
    }
    lp_distance_relaxed(a, b, p)
}

/// As [`lp_distance`] but accepts any `p >= 1`.
pub fn lp_distance_relaxed(a: &Trace, b: &Trace, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::validation("L^p distance needs finite p >= 1"));
    }
    check_horizons(a, b)?;
    let d = differences(a, b);
    let mut integral = 0.0;
    for w in d.windows(2) {
        integral += 0.5 * (w[1].0 - w[0].0) * (w[0].1.powf(p) + w[1].1.powf(p));
    }
    Ok(integral.powf(1.0 / p))
}
