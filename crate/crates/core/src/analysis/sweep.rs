use serde::{Deserialize, Serialize};

use super::dimension::{box_dimension, ScaleSpec};
use super::stats::{mean, pooled_kendall_tau, stderr};
use crate::driving::{DrivingKind, DrivingSpec};
use crate::ensemble::map_indexed;
use crate::rng::derive_seed;
use crate::splitting::{simulate_fsle, FidelitySchedule};
use crate::{Error, Result};

/// Kendall tau a monotonicity direction must reach to pass.
pub const MONOTONICITY_TAU: f64 = 0.6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kappas: Vec<f64>,
    pub hursts: Vec<f64>,
    pub paths_per_cell: usize,
    pub schedule: FidelitySchedule,
    pub seed: u64,
    #[serde(default)]
    pub scale: ScaleSpec,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappas.is_empty() || self.hursts.is_empty() {
            return Err(Error::validation(
                "sweep needs at least one kappa and one Hurst exponent",
            ));
        }
        if self.paths_per_cell == 0 {
            return Err(Error::validation("paths per cell must be >= 1"));
        }
        for &k in &self.kappas {
            crate::driving::check_kappa(k)?;
        }
        for &h in &self.hursts {
            crate::driving::check_hurst(h)?;
        }
        self.schedule.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kappa: f64,
    pub hurst: f64,
    /// Mean box-counting slope over successful paths (NaN if none).
    pub mean_df: f64,
    pub stderr: f64,
    /// Successful paths.
    pub paths: usize,
    pub steps: usize,
    pub slopes: Vec<f64>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    /// Row-major: all kappas for the first Hurst exponent, then the next.
    pub cells: Vec<SweepCell>,
    /// Pooled Kendall tau of `D_f` against kappa at fixed H.
    pub tau_kappa: Option<f64>,
    /// Pooled Kendall tau of `-D_f` against H at fixed kappa.
    pub tau_hurst: Option<f64>,
    pub pass_kappa: bool,
    pub pass_hurst: bool,
}

/// Box-counting dimension of fractional traces over a `kappa x H` grid.
///
/// Every (cell, path) pair gets its own derived seed, so the table does not
/// depend on how the work is scheduled. Failed paths are recorded in their
/// cell and the sweep carries on.
pub fn dimension_sweep(config: &SweepConfig) -> Result<SweepTable> {
    config.validate()?;
    let nk = config.kappas.len();
    let ncell = nk * config.hursts.len();
    let per = config.paths_per_cell;
    let outcomes: Vec<std::result::Result<f64, String>> = map_indexed(ncell * per, |task| {
        let (cell, path) = (task / per, task % per);
        let kappa = config.kappas[cell % nk];
        let hurst = config.hursts[cell / nk];
        let seed = derive_seed(derive_seed(config.seed, cell as u64), path as u64);
        let run = || -> Result<f64> {
            let spec = DrivingSpec::new(DrivingKind::Fractional { hurst }, kappa, seed)?;
            let trace = simulate_fsle(&spec, &config.schedule)?;
            Ok(box_dimension(&trace.points, &config.scale)?.slope)
        };
        run().map_err(|e| format!("path {path}: {e}"))
    });
    let mut cells = Vec::with_capacity(ncell);
    for cell in 0..ncell {
        let mut slopes = Vec::new();
        let mut failures = Vec::new();
        for r in &outcomes[cell * per..(cell + 1) * per] {
            match r {
                Ok(s) => slopes.push(*s),
                Err(e) => failures.push(e.clone()),
            }
        }
        let (mean_df, se) = if slopes.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (mean(&slopes), stderr(&slopes))
        };
        cells.push(SweepCell {
            kappa: config.kappas[cell % nk],
            hurst: config.hursts[cell / nk],
            mean_df,
            stderr: se,
            paths: slopes.len(),
            steps: config.schedule.steps,
            slopes,
            failures,
        });
    }
    let ok = |c: &&SweepCell| c.mean_df.is_finite();
    let by_hurst: Vec<Vec<(f64, f64)>> = config
        .hursts
        .iter()
        .enumerate()
        .map(|(h, _)| {
            cells[h * nk..(h + 1) * nk]
                .iter()
                .filter(ok)
                .map(|c| (c.kappa, c.mean_df))
                .collect()
        })
        .collect();
    let by_kappa: Vec<Vec<(f64, f64)>> = (0..nk)
        .map(|k| {
            cells
                .iter()
                .skip(k)
                .step_by(nk)
                .filter(ok)
                .map(|c| (c.hurst, -c.mean_df))
                .collect()
        })
        .collect();
    let tau_kappa = pooled_kendall_tau(&by_hurst);
    let tau_hurst = pooled_kendall_tau(&by_kappa);
    Ok(SweepTable {
        config: config.clone(),
        cells,
        pass_kappa: tau_kappa.is_some_and(|t| t >= MONOTONICITY_TAU),
        pass_hurst: tau_hurst.is_some_and(|t| t >= MONOTONICITY_TAU),
        tau_kappa,
        tau_hurst,
    })
}
