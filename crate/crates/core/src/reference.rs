//! Reference solvers used as independent oracles for the splitting scheme.

use serde::{Deserialize, Serialize};

use crate::driving::{DrivingPath, Scaling};
use crate::halfplane::slit_reverse;
use crate::splitting::{Trace, TraceOrigin};
use crate::{ComplexPoint, Error, Result};

/// Forward integration gives up once `|g - lambda|` drops below this.
pub const SWALLOW_EPS: f64 = 1e-6;

/// Largest relative change of `g - lambda` per forward substep.
const FORWARD_MAX_REL_CHANGE: f64 = 1e-2;

/// Right-continuous step function: `levels[j]` on `[breakpoints[j], breakpoints[j+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantDriving {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl PiecewiseConstantDriving {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || levels.len() + 1 != breakpoints.len() {
            return Err(Error::validation(
                "need n + 1 breakpoints for n levels (n >= 1)",
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("breakpoints must be strictly increasing"));
        }
        Ok(PiecewiseConstantDriving {
            breakpoints,
            levels,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// The leg structure equivalent to the splitting scheme driven by the
    /// scaled path `force`.
    ///
    /// The scheme's state is `Z = W - xi` for the absolute reverse flow `W`
    /// driven by `xi = -force`, so on every mesh cell the level is
    /// `-force[k]` for the first half and `-force[k+1]` for the second.
    /// Breakpoints sit at every mesh time and cell midpoint; see
    /// [`exact_splitting_states`] for the states in the scheme's frame.
    pub fn splitting_legs(force: &DrivingPath) -> Result<Self> {
        let t = force.times();
        let n = t.len() - 1;
        let mut breakpoints = Vec::with_capacity(2 * n + 1);
        let mut levels = Vec::with_capacity(2 * n);
        for k in 0..n {
            breakpoints.push(t[k]);
            breakpoints.push(t[k] + 0.5 * (t[k + 1] - t[k]));
            levels.push(-force.values[k]);
            levels.push(-force.values[k + 1]);
        }
        breakpoints.push(t[n]);
        PiecewiseConstantDriving::new(breakpoints, levels)
    }
}

/// States relative to the active level: entry `j` is `W(b_j) - levels[j]`
/// (the last entry is relative to the final level). Within an interval the
/// slit map `A + sqrt_h((w - A)^2 - 4t)` acts on `w - A` as `sqrt_h(v^2 - 4t)`,
/// and a level change is a pure translation of `v`.
fn relative_states(z0: ComplexPoint, driving: &PiecewiseConstantDriving) -> Vec<ComplexPoint> {
    let b = &driving.breakpoints;
    let lv = &driving.levels;
    let mut out = Vec::with_capacity(b.len());
    let mut v = z0 - lv[0];
    out.push(v);
    for j in 0..lv.len() {
        v = slit_reverse(v, 0.0, b[j + 1] - b[j]);
        if j + 1 < lv.len() {
            v += lv[j] - lv[j + 1];
        }
        out.push(v);
    }
    out
}

/// Reverse Loewner flow under piecewise-constant driving, composed exactly
/// from slit maps and translations. Returns the state at every breakpoint.
pub fn exact_piecewise_trace(z0: ComplexPoint, driving: &PiecewiseConstantDriving) -> Trace {
    let rel = relative_states(z0, driving);
    let last = driving.levels.len() - 1;
    let mut points: Vec<ComplexPoint> = rel
        .iter()
        .zip(&driving.levels)
        .map(|(v, a)| v + a)
        .collect();
    points[0] = z0;
    points.push(rel[last + 1] + driving.levels[last]);
    Trace {
        times: driving.breakpoints.clone(),
        points,
        origin: TraceOrigin::Oracle {
            name: "exact_piecewise".into(),
        },
    }
}

/// Exact slit-map composition on the splitting's own legs, reported in the
/// scheme's frame at mesh times: `Z_k = W(t_k) + force[k]`.
pub fn exact_splitting_states(z0: ComplexPoint, force: &DrivingPath) -> Result<Vec<ComplexPoint>> {
    let legs = PiecewiseConstantDriving::splitting_legs(force)?;
    let rel = relative_states(z0, &legs);
    let n = force.values.len() - 1;
    // the final state is relative to the last level, -force[n]
    Ok((0..=n).map(|k| rel[2 * k]).collect())
}

/// Euler–Maruyama for `dZ = -2/Z dt + sqrt(kappa) dB`.
///
/// A raw path is scaled by `sqrt(kappa)`; a path already carrying the force
/// is used as is. Unlike the splitting scheme, Euler can cross the real
/// axis; that aborts with the offending step.
pub fn euler_reverse(z0: ComplexPoint, path: &DrivingPath, kappa: f64) -> Result<Trace> {
    if !(z0.im > 0.0) {
        return Err(Error::validation(
            "initial state must lie in the upper half-plane",
        ));
    }
    let scale = match path.scaling {
        Scaling::Raw => path.kind.force_scale(kappa),
        Scaling::Force { .. } => 1.0,
    };
    let t = path.times();
    let mut points = Vec::with_capacity(t.len());
    points.push(z0);
    let mut z = z0;
    for k in 0..t.len() - 1 {
        let h = t[k + 1] - t[k];
        z = z - 2.0 / z * h + scale * (path.values[k + 1] - path.values[k]);
        if !(z.im > 0.0) {
            return Err(Error::Crossing {
                step: k,
                imag: z.im,
            });
        }
        points.push(z);
    }
    Ok(Trace {
        times: t.to_vec(),
        points,
        origin: TraceOrigin::Oracle {
            name: "euler_reverse".into(),
        },
    })
}

/// `g_T(z0)` for the forward Loewner equation `dg/dt = 2/(g - lambda_t)`.
///
/// The driving is the path's values (taken as the force itself), linear
/// between mesh points. Each cell is integrated with classical RK4; substeps
/// are shortened so that `g - lambda` changes by at most 1% per substep,
/// which refines automatically as the point nears the driving.
pub fn forward_point(z0: ComplexPoint, driving: &DrivingPath) -> Result<ComplexPoint> {
    if !(z0.im > 0.0) {
        return Err(Error::validation(
            "initial point must lie in the upper half-plane",
        ));
    }
    let t = driving.times();
    let lam = &driving.values;
    let mut g = z0;
    for k in 0..t.len() - 1 {
        let (t0, t1) = (t[k], t[k + 1]);
        let slope = (lam[k + 1] - lam[k]) / (t1 - t0);
        let at = |s: f64| lam[k] + slope * (s - t0);
        let field = |s: f64, g: ComplexPoint| 2.0 / (g - at(s));
        let mut s = t0;
        while s < t1 {
            let gap = (g - at(s)).norm();
            if gap < SWALLOW_EPS {
                return Err(Error::Swallowed { time: s, gap });
            }
            let mut dt = (t1 - s).min(FORWARD_MAX_REL_CHANGE * gap * gap / 2.0);
            if slope != 0.0 {
                dt = dt.min(FORWARD_MAX_REL_CHANGE * gap / slope.abs());
            }
            let k1 = field(s, g);
            let k2 = field(s + 0.5 * dt, g + 0.5 * dt * k1);
            let k3 = field(s + 0.5 * dt, g + 0.5 * dt * k2);
            let k4 = field(s + dt, g + dt * k3);
            g += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s = if t1 - (s + dt) <= 1e-15 * t1.abs().max(1.0) {
                t1
            } else {
                s + dt
            };
        }
    }
    let gap = (g - lam[t.len() - 1]).norm();
    if gap < SWALLOW_EPS {
        return Err(Error::Swallowed {
            time: t[t.len() - 1],
            gap,
        });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::{DrivingKind, Mesh};
    use crate::halfplane::slit_forward;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn constant_path(level: f64, horizon: f64, steps: usize) -> DrivingPath {
        // paths start at 0; a constant level is a jump right after t = 0,
        // so emulate it with a force path whose first cell is negligible
        let mut times = vec![0.0, 1e-14];
        times.extend((1..=steps).map(|k| horizon * k as f64 / steps as f64));
        let mut values = vec![0.0];
        values.extend(std::iter::repeat_n(level, steps + 1));
        DrivingPath::new(
            Mesh::new(times).unwrap(),
            values,
            DrivingKind::StandardBm,
            0,
            Scaling::Force { kappa: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn euler_single_step() {
        let mesh = Mesh::new(vec![0.0, 0.1]).unwrap();
        let p = DrivingPath::new(
            mesh,
            vec![0.0, 0.0],
            DrivingKind::StandardBm,
            0,
            Scaling::Raw,
        )
        .unwrap();
        let tr = euler_reverse(c(0.0, 1.0), &p, 4.0).unwrap();
        assert!((tr.points[1] - c(0.0, 1.2)).norm() < 1e-15);
    }

    #[test]
    fn euler_rejects_real_start() {
        let mesh = Mesh::new(vec![0.0, 10.0]).unwrap();
        let p = DrivingPath::new(
            mesh,
            vec![0.0, 0.0],
            DrivingKind::StandardBm,
            0,
            Scaling::Raw,
        )
        .unwrap();
        assert!(euler_reverse(c(1.0, 0.0), &p, 1.0).is_err());
        assert!(euler_reverse(c(1.0, 1e-3), &p, 1.0).is_ok());
    }

    #[test]
    fn single_interval_is_one_slit_map() {
        let d = PiecewiseConstantDriving::new(vec![0.0, 0.7], vec![0.0]).unwrap();
        let tr = exact_piecewise_trace(c(0.2, 0.5), &d);
        assert_eq!(tr.points[1], slit_reverse(c(0.2, 0.5), 0.0, 0.7));
    }

    #[test]
    fn piecewise_validation() {
        assert!(PiecewiseConstantDriving::new(vec![0.0], vec![]).is_err());
        assert!(PiecewiseConstantDriving::new(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(PiecewiseConstantDriving::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn forward_constant_driving_closed_form() {
        let z0 = c(1.0, 1.0);
        let g = forward_point(z0, &constant_path(0.0, 1.0, 8)).unwrap();
        assert!((g - slit_forward(z0, 0.0, 1.0)).norm() < 1e-8, "{g}");

        let z0 = c(3.0, 1.0);
        let g = forward_point(z0, &constant_path(2.0, 1.0, 8)).unwrap();
        assert!((g - slit_forward(z0, 2.0, 1.0)).norm() < 1e-8, "{g}");
    }

    #[test]
    fn forward_detects_swallowing_on_the_slit() {
        // i sits on the slit grown by constant driving 0 and is hit at t = 1/4
        match forward_point(c(0.0, 1.0), &constant_path(0.0, 1.0, 8)) {
            Err(Error::Swallowed { time, .. }) => assert!((time - 0.25).abs() < 1e-6, "{time}"),
            other => panic!("expected swallowing, got {other:?}"),
        }
    }
}
