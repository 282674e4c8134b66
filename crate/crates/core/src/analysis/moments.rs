//! Second and fourth moments of the standard scheme against their closed forms.
//!
//! Starting from `Z_0 = i y`, the scheme satisfies
//! `E[Z_t^2] = -y^2 + (kappa - 4) t` and
//! `E[Z_t^4] = y^4 + (6 kappa - 8)(-y^2 t + (kappa - 4) t^2 / 2)` at every
//! mesh time. The quadrature check evaluates the one-step conditional
//! moments with Gauss–Hermite nodes (exact for polynomials in the Gaussian
//! increment) and propagates them; no sampling is involved.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::{mean, stderr};
use crate::driving::{DrivingKind, DrivingSpec};
use crate::ensemble::map_indexed;
use crate::rng::derive_seed;
use crate::splitting::{simulate_sle, sle_step, FidelitySchedule};
use crate::{ComplexPoint, Error, Result};

pub const QUADRATURE_NODES: usize = 20;

/// Quadrature tolerance for the second moment.
pub const SECOND_TOLERANCE: f64 = 1e-10;
/// Quadrature tolerance for the fourth moment.
pub const FOURTH_TOLERANCE: f64 = 1e-9;
/// Ensemble deviations must stay within this many standard errors.
pub const ENSEMBLE_SIGMAS: f64 = 3.0;

pub fn closed_form_second(kappa: f64, y0: f64, t: f64) -> f64 {
    -y0 * y0 + (kappa - 4.0) * t
}

pub fn closed_form_fourth(kappa: f64, y0: f64, t: f64) -> f64 {
    y0.powi(4) + (6.0 * kappa - 8.0) * (-y0 * y0 * t + (kappa - 4.0) * t * t / 2.0)
}

/// Nodes and weights for `integral exp(-x^2) f(x) dx`, by Newton iteration
/// on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = (j + 1) as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `(sqrt(2) x_i, w_i / sqrt(pi))`: nodes and probabilities for `E f(N(0,1))`.
fn standard_normal_rule(n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_hermite(n);
    let norm = std::f64::consts::PI.sqrt();
    x.iter()
        .zip(&w)
        .map(|(&a, &b)| (std::f64::consts::SQRT_2 * a, b / norm))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MomentMethod {
    Quadrature { nodes: usize, affine_residual: f64 },
    NestedQuadrature { nodes: usize },
    Ensemble { paths: usize, seed: u64 },
}

/// Closed-form and measured moments at selected mesh indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub kappa: f64,
    pub y0: f64,
    pub horizon: f64,
    pub steps: usize,
    pub method: MomentMethod,
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub expected_second: Vec<f64>,
    pub expected_fourth: Vec<f64>,
    pub second: Vec<Complex64>,
    pub fourth: Vec<Complex64>,
    /// Standard errors of the real and imaginary parts (ensemble only).
    pub stderr_second: Option<Vec<Complex64>>,
    pub stderr_fourth: Option<Vec<Complex64>>,
    pub max_deviation_second: f64,
    pub max_deviation_fourth: f64,
    /// Indices whose deviation breaches the tolerance.
    pub breaches: Vec<usize>,
    pub pass: bool,
}

impl MomentReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kappa: f64,
        y0: f64,
        schedule_h: f64,
        horizon: f64,
        steps: usize,
        method: MomentMethod,
        indices: Vec<usize>,
        second: Vec<Complex64>,
        fourth: Vec<Complex64>,
        errors: Option<(Vec<Complex64>, Vec<Complex64>)>,
    ) -> Self {
        let times: Vec<f64> = indices
            .iter()
            .map(|&k| {
                if k == steps {
                    horizon
                } else {
                    k as f64 * schedule_h
                }
            })
            .collect();
        let expected_second: Vec<f64> = times
            .iter()
            .map(|&t| closed_form_second(kappa, y0, t))
            .collect();
        let expected_fourth: Vec<f64> = times
            .iter()
            .map(|&t| closed_form_fourth(kappa, y0, t))
            .collect();
        let dev = |got: &[Complex64], want: &[f64]| -> Vec<Complex64> {
            got.iter().zip(want).map(|(g, &w)| g - w).collect()
        };
        let d2 = dev(&second, &expected_second);
        let d4 = dev(&fourth, &expected_fourth);
        let max_deviation_second = d2.iter().fold(0.0f64, |m, d| m.max(d.norm()));
        let max_deviation_fourth = d4.iter().fold(0.0f64, |m, d| m.max(d.norm()));
        let mut breaches = Vec::new();
        for (j, &k) in indices.iter().enumerate() {
            let bad = match &errors {
                None => d2[j].norm() > SECOND_TOLERANCE || d4[j].norm() > FOURTH_TOLERANCE,
                Some((s2, s4)) => {
                    let out = |d: Complex64, s: Complex64| {
                        d.re.abs() > ENSEMBLE_SIGMAS * s.re || d.im.abs() > ENSEMBLE_SIGMAS * s.im
                    };
                    out(d2[j], s2[j]) || out(d4[j], s4[j])
                }
            };
            if bad {
                breaches.push(k);
            }
        }
        let (stderr_second, stderr_fourth) = match errors {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        MomentReport {
            kappa,
            y0,
            horizon,
            steps,
            method,
            pass: breaches.is_empty(),
            indices,
            times,
            expected_second,
            expected_fourth,
            second,
            fourth,
            stderr_second,
            stderr_fourth,
            max_deviation_second,
            max_deviation_fourth,
            breaches,
        }
    }
}

fn check_inputs(kappa: f64, schedule: &FidelitySchedule) -> Result<()> {
    crate::driving::check_kappa(kappa)?;
    schedule.validate()
}

/// Conditional one-step expectations `(E[Z'^2 | z], E[Z'^4 | z])`.
fn one_step(
    z: ComplexPoint,
    h: f64,
    kappa: f64,
    rule: &[(f64, f64)],
) -> Result<(Complex64, Complex64)> {
    let sd = h.sqrt();
    let mut m2 = Complex64::new(0.0, 0.0);
    let mut m4 = Complex64::new(0.0, 0.0);
    for &(x, w) in rule {
        let next = sle_step(z, h, sd * x, kappa)?;
        let sq = next * next;
        m2 += w * sq;
        m4 += w * sq * sq;
    }
    Ok((m2, m4))
}

fn solve3(a: [[Complex64; 3]; 3], b: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let det = |m: [[Complex64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.norm() == 0.0 {
        return None;
    }
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// Deterministic moment check by Gauss–Hermite quadrature.
///
/// The conditional moments of one step are affine in `(1, z^2, z^4)`. Their
/// coefficients are measured by quadrature at three probe states, checked
/// at a fourth, and propagated from `Z_0 = i y0` through every step.
pub fn quadrature_moments(kappa: f64, schedule: &FidelitySchedule) -> Result<MomentReport> {
    check_inputs(kappa, schedule)?;
    let h = schedule.step();
    let rule = standard_normal_rule(QUADRATURE_NODES);
    let probes = [
        ComplexPoint::new(0.0, 1.0),
        ComplexPoint::new(0.5, 1.5),
        ComplexPoint::new(-0.7, 0.4),
        ComplexPoint::new(1.3, 2.1),
    ];
    let measured: Vec<(Complex64, Complex64)> = probes
        .iter()
        .map(|&p| one_step(p, h, kappa, &rule))
        .collect::<Result<_>>()?;
    let sq: Vec<Complex64> = probes.iter().map(|p| p * p).collect();

    // E[Z'^2 | z] = a + b z^2
    let b2 = (measured[0].0 - measured[1].0) / (sq[0] - sq[1]);
    let a2 = measured[0].0 - b2 * sq[0];
    // E[Z'^4 | z] = c + d z^2 + e z^4
    let rows = [0, 1, 2].map(|j| [Complex64::new(1.0, 0.0), sq[j], sq[j] * sq[j]]);
    let coef = solve3(rows, [measured[0].1, measured[1].1, measured[2].1])
        .ok_or_else(|| Error::Degenerate("singular probe system".into()))?;
    let mut affine_residual = 0.0f64;
    for j in 2..4 {
        let r2 = (a2 + b2 * sq[j] - measured[j].0).norm() / measured[j].0.norm().max(1.0);
        affine_residual = affine_residual.max(r2);
    }
    let r4 = (coef[0] + coef[1] * sq[3] + coef[2] * sq[3] * sq[3] - measured[3].1).norm()
        / measured[3].1.norm().max(1.0);
    affine_residual = affine_residual.max(r4);

    let z0 = schedule.start();
    let mut m2 = z0 * z0;
    let mut m4 = m2 * m2;
    let steps = schedule.steps;
    let mut second = Vec::with_capacity(steps + 1);
    let mut fourth = Vec::with_capacity(steps + 1);
    second.push(m2);
    fourth.push(m4);
    for _ in 0..steps {
        let n4 = coef[0] + coef[1] * m2 + coef[2] * m4;
        m2 = a2 + b2 * m2;
        m4 = n4;
        second.push(m2);
        fourth.push(m4);
    }
    Ok(MomentReport::assemble(
        kappa,
        schedule.y0,
        h,
        schedule.horizon,
        steps,
        MomentMethod::Quadrature {
            nodes: QUADRATURE_NODES,
            affine_residual,
        },
        (0..=steps).collect(),
        second,
        fourth,
        None,
    ))
}

/// Brute-force tensor quadrature over the first `depth` steps (no affine
/// shortcut): `QUADRATURE_NODES^depth` composed step evaluations.
pub fn nested_quadrature_moments(
    kappa: f64,
    schedule: &FidelitySchedule,
    depth: usize,
) -> Result<MomentReport> {
    check_inputs(kappa, schedule)?;
    if depth == 0 || depth > 4 || depth > schedule.steps {
        return Err(Error::validation(
            "nested quadrature depth must be in 1..=min(4, steps)",
        ));
    }
    let h = schedule.step();
    let rule = standard_normal_rule(QUADRATURE_NODES);
    let sd = h.sqrt();
    let z0 = schedule.start();
    let mut level: Vec<(ComplexPoint, f64)> = vec![(z0, 1.0)];
    let mut second = vec![z0 * z0];
    let mut fourth = vec![z0 * z0 * z0 * z0];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * rule.len());
        for &(z, p) in &level {
            for &(x, w) in &rule {
                next.push((sle_step(z, h, sd * x, kappa)?, p * w));
            }
        }
        let (mut m2, mut m4) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &(z, p) in &next {
            let s = z * z;
            m2 += p * s;
            m4 += p * s * s;
        }
        second.push(m2);
        fourth.push(m4);
        level = next;
    }
    Ok(MomentReport::assemble(
        kappa,
        schedule.y0,
        h,
        schedule.horizon,
        schedule.steps,
        MomentMethod::NestedQuadrature {
            nodes: QUADRATURE_NODES,
        },
        (0..=depth).collect(),
        second,
        fourth,
        None,
    ))
}

/// Monte Carlo moments over `paths` independent standard traces, sampled at
/// `sample_points` evenly spaced mesh indices ending at the horizon.
pub fn ensemble_moments(
    kappa: f64,
    schedule: &FidelitySchedule,
    paths: usize,
    seed: u64,
    sample_points: usize,
) -> Result<MomentReport> {
    check_inputs(kappa, schedule)?;
    if paths < 2 {
        return Err(Error::validation("ensemble needs at least two paths"));
    }
    let steps = schedule.steps;
    let sample_points = sample_points.clamp(1, steps);
    let indices: Vec<usize> = (1..=sample_points)
        .map(|j| j * steps / sample_points)
        .collect();
    let runs: Vec<Result<Vec<ComplexPoint>>> = map_indexed(paths, |i| {
        let spec = DrivingSpec::new(DrivingKind::StandardBm, kappa, derive_seed(seed, i as u64))?;
        let tr = simulate_sle(&spec, schedule)?;
        Ok(indices.iter().map(|&k| tr.points[k]).collect())
    });
    let runs: Vec<Vec<ComplexPoint>> = runs.into_iter().collect::<Result<_>>()?;
    let mut second = Vec::new();
    let mut fourth = Vec::new();
    let mut se2 = Vec::new();
    let mut se4 = Vec::new();
    for j in 0..indices.len() {
        let sq: Vec<Complex64> = runs.iter().map(|r| r[j] * r[j]).collect();
        let qu: Vec<Complex64> = sq.iter().map(|s| s * s).collect();
        let part =
            |v: &[Complex64], f: fn(&Complex64) -> f64| v.iter().map(f).collect::<Vec<f64>>();
        for (v, m, s) in [(&sq, &mut second, &mut se2), (&qu, &mut fourth, &mut se4)] {
            let re = part(v, |c| c.re);
            let im = part(v, |c| c.im);
            m.push(Complex64::new(mean(&re), mean(&im)));
            s.push(Complex64::new(stderr(&re), stderr(&im)));
        }
    }
    Ok(MomentReport::assemble(
        kappa,
        schedule.y0,
        schedule.step(),
        schedule.horizon,
        steps,
        MomentMethod::Ensemble { paths, seed },
        indices,
        second,
        fourth,
        Some((se2, se4)),
    ))
}
