//! Coupled-path convergence harnesses.
//!
//! Every path is sampled once on the coarsest mesh and bridge-refined to the
//! finest level; coarser levels are read off the refined path, so all levels
//! see the same Brownian motion.

use serde::{Deserialize, Serialize};

use super::distance::{lp_distance, sup_distance};
use super::stats::{linear_regression, median};
use crate::driving::{power_interpolate, refine_bm, sample_bm, DrivingPath, Mesh};
use crate::ensemble::map_indexed;
use crate::reference::{euler_reverse, forward_point};
use crate::rng::derive_seed;
use crate::splitting::{split_states, LoewnerDrift, Trace, TraceOrigin};
use crate::{ComplexPoint, Error, Result};

/// Distances at or below this are treated as zero when checking monotonicity.
pub const DISTANCE_FLOOR: f64 = 1e-12;

/// What each level is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvergenceReference {
    /// Level `M` against level `2M`.
    SelfConsistent,
    /// Every level against Euler–Maruyama on a fine mesh of `fine_steps`.
    Euler { fine_steps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub kappa: f64,
    pub y0: f64,
    pub horizon: f64,
    /// Dyadic step counts, increasing.
    pub levels: Vec<usize>,
    pub paths: usize,
    pub seed: u64,
    pub reference: ConvergenceReference,
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        crate::driving::check_kappa(self.kappa)?;
        if !(self.y0 > 0.0 && self.y0.is_finite()) {
            return Err(Error::validation("y0 must be > 0"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::validation("horizon T must be > 0"));
        }
        if self.levels.len() < 2 {
            return Err(Error::validation("at least two levels are needed"));
        }
        if self.paths == 0 {
            return Err(Error::validation("at least one path is needed"));
        }
        for w in self.levels.windows(2) {
            if w[1] != 2 * w[0] {
                return Err(Error::validation("levels must double from one to the next"));
            }
        }
        if !self.levels[0].is_power_of_two() {
            return Err(Error::validation("levels must be powers of two"));
        }
        if let ConvergenceReference::Euler { fine_steps } = self.reference {
            if !fine_steps.is_power_of_two() || fine_steps < *self.levels.last().unwrap() {
                return Err(Error::validation(
                    "fine Euler mesh must be a power of two at least the finest level",
                ));
            }
        }
        Ok(())
    }

    fn finest(&self) -> usize {
        match self.reference {
            ConvergenceReference::SelfConsistent => 2 * self.levels.last().unwrap(),
            ConvergenceReference::Euler { fine_steps } => fine_steps,
        }
    }
}

/// Median distances for one level (against `2M` or the Euler reference).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDistance {
    pub steps: usize,
    pub median_sup: f64,
    pub median_l2: f64,
    pub sup: Vec<f64>,
    pub l2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ConvergenceConfig,
    pub levels: Vec<LevelDistance>,
    /// Slope of `-log2(median sup)` against `log2 M`, when every median is
    /// above the floor.
    pub empirical_order: Option<f64>,
    pub decreasing: bool,
}

/// Reads the values of `path` at every `stride`-th mesh point.
pub fn coarsen(path: &DrivingPath, stride: usize) -> Result<DrivingPath> {
    if stride == 0 || !(path.values.len() - 1).is_multiple_of(stride) {
        return Err(Error::validation(format!(
            "stride {stride} does not divide the mesh"
        )));
    }
    let times: Vec<f64> = path.times().iter().step_by(stride).copied().collect();
    let values = path.values.iter().step_by(stride).copied().collect();
    Ok(DrivingPath {
        mesh: Mesh::new(times)?,
        values,
        ..path.clone()
    })
}

fn splitting_trace(z0: ComplexPoint, raw: &DrivingPath, kappa: f64) -> Result<Trace> {
    let force = raw.to_force(kappa)?;
    let points = split_states(z0, &force, &LoewnerDrift)?;
    Trace::new(force.times().to_vec(), points, TraceOrigin::External)
}

/// Strictly decreasing, except that values already at the floor may repeat.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] <= DISTANCE_FLOOR && w[1] <= DISTANCE_FLOOR))
}

/// Distances from each level to its reference, per path. Comparisons are
/// made at the level's own mesh points.
pub fn coupled_convergence(config: &ConvergenceConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let coarse = config.levels[0];
    let finest = config.finest();
    let z0 = ComplexPoint::new(0.0, config.y0);
    let per_path: Vec<Result<Vec<(f64, f64)>>> = map_indexed(config.paths, |i| {
        let base = sample_bm(
            &Mesh::uniform(config.horizon, coarse)?,
            derive_seed(config.seed, i as u64),
        );
        let fine = refine_bm(&base, finest / coarse)?;
        let reference = match config.reference {
            ConvergenceReference::Euler { .. } => Some(euler_reverse(z0, &fine, config.kappa)?),
            ConvergenceReference::SelfConsistent => None,
        };
        config
            .levels
            .iter()
            .map(|&m| {
                let here = splitting_trace(z0, &coarsen(&fine, finest / m)?, config.kappa)?;
                let other = match &reference {
                    Some(r) => r.subsample(finest / m),
                    None => splitting_trace(z0, &coarsen(&fine, finest / (2 * m))?, config.kappa)?
                        .subsample(2),
                };
                Ok((
                    sup_distance(&here, &other)?,
                    lp_distance(&here, &other, 2.0)?,
                ))
            })
            .collect()
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    let levels: Vec<LevelDistance> = config
        .levels
        .iter()
        .enumerate()
        .map(|(j, &steps)| {
            let sup: Vec<f64> = per_path.iter().map(|p| p[j].0).collect();
            let l2: Vec<f64> = per_path.iter().map(|p| p[j].1).collect();
            LevelDistance {
                steps,
                median_sup: median(&sup),
                median_l2: median(&l2),
                sup,
                l2,
            }
        })
        .collect();
    let medians: Vec<f64> = levels.iter().map(|l| l.median_sup).collect();
    let empirical_order = if medians.iter().all(|&d| d > DISTANCE_FLOOR) {
        let x: Vec<f64> = levels.iter().map(|l| (l.steps as f64).log2()).collect();
        let y: Vec<f64> = medians.iter().map(|d| -d.log2()).collect();
        linear_regression(&x, &y).map(|f| f.slope)
    } else {
        None
    };
    Ok(ConvergenceReport {
        config: config.clone(),
        decreasing: strictly_decreasing(&medians),
        levels,
        empirical_order,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationConfig {
    pub exponent: f64,
    /// Force scale applied to the Brownian path.
    pub kappa: f64,
    pub horizon: f64,
    /// Coarse step counts, increasing powers of two.
    pub levels: Vec<usize>,
    /// Steps of the reference path; a multiple of every level.
    pub fine_steps: usize,
    pub test_points: Vec<ComplexPoint>,
    pub paths: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub config: InterpolationConfig,
    pub steps: Vec<usize>,
    /// Median over paths of `max_z |g_T(z) - g_T^fine(z)|`, per level.
    pub sup: Vec<f64>,
    /// The per-path values, indexed `[level][path]`.
    pub per_path: Vec<Vec<f64>>,
    pub decreasing: bool,
}

/// Forward images under the power interpolant of coarse samples of one
/// Brownian path, against the images under the path itself.
pub fn interpolation_convergence(config: &InterpolationConfig) -> Result<InterpolationReport> {
    crate::driving::check_kappa(config.kappa)?;
    if config.test_points.is_empty() {
        return Err(Error::validation("no test points"));
    }
    if config.levels.is_empty()
        || config
            .levels
            .iter()
            .any(|&m| m == 0 || !config.fine_steps.is_multiple_of(m))
    {
        return Err(Error::validation("every level must divide the fine mesh"));
    }
    if config.paths == 0 {
        return Err(Error::validation("at least one path is needed"));
    }
    let mesh = Mesh::uniform(config.horizon, config.fine_steps)?;
    let runs: Vec<Result<Vec<f64>>> = map_indexed(config.paths, |i| {
        let fine = sample_bm(&mesh, derive_seed(config.seed, i as u64)).to_force(config.kappa)?;
        let exact: Vec<ComplexPoint> = config
            .test_points
            .iter()
            .map(|&z| forward_point(z, &fine))
            .collect::<Result<_>>()?;
        config
            .levels
            .iter()
            .map(|&m| {
                let stride = config.fine_steps / m;
                let driving = power_interpolate(&coarsen(&fine, stride)?, config.exponent, stride)?;
                config
                    .test_points
                    .iter()
                    .zip(&exact)
                    .try_fold(0.0f64, |acc, (&z, e)| {
                        Ok(acc.max((forward_point(z, &driving)? - e).norm()))
                    })
            })
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let per_path: Vec<Vec<f64>> = (0..config.levels.len())
        .map(|j| runs.iter().map(|r| r[j]).collect())
        .collect();
    let sup: Vec<f64> = per_path.iter().map(|v| median(v)).collect();
    Ok(InterpolationReport {
        config: config.clone(),
        steps: config.levels.clone(),
        decreasing: strictly_decreasing(&sup),
        sup,
        per_path,
    })
}
