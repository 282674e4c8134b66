//! Per-command configuration: JSON file values, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sle_core::analysis::{ConvergenceReference, RulerSpec, ScaleSpec};
use sle_core::driving::DrivingKind;
use sle_core::splitting::FidelitySchedule;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sle,
    Nrsle,
    Fsle,
}

/// Reads a JSON config file into `T`.
///
/// The file's keys are laid over the serialized `T::default()`, so omitted
/// fields keep the command's own defaults. Unknown keys are rejected by hand
/// since `deny_unknown_fields` does not work with flattening.
pub fn load<T: DeserializeOwned + Serialize + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let bad = |e: String| CliError::Config(format!("config {}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let Value::Object(fields) = &value else {
        return Err(bad("expected a JSON object".into()));
    };
    let Value::Object(mut merged) =
        serde_json::to_value(T::default()).map_err(|e| bad(e.to_string()))?
    else {
        unreachable!("configs serialize to objects")
    };
    for (key, v) in fields {
        if key != "workers" && !merged.contains_key(key) {
            return Err(bad(format!("unknown field '{key}'")));
        }
        merged.insert(key.clone(), v.clone());
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| bad(e.to_string()))
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Mesh and starting height. `fidelity` switches to the theory schedule,
/// which then fixes `steps` and `y0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub steps: usize,
    pub y0: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub fidelity: Option<u64>,
}

impl ScheduleConfig {
    pub fn new(steps: usize) -> Self {
        ScheduleConfig {
            steps,
            y0: 0.01,
            horizon: 1.0,
            fidelity: None,
        }
    }

    pub fn schedule(&self) -> Result<FidelitySchedule, CliError> {
        Ok(match self.fidelity {
            Some(n) => FidelitySchedule::theory(n, self.horizon)?,
            None => FidelitySchedule::practical(self.steps, self.y0, self.horizon)?,
        })
    }
}

/// Which process drives the flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub kind: Kind,
    pub kappa: f64,
    pub hurst: Option<f64>,
    pub reinforce: Option<f64>,
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig {
            kind: Kind::Sle,
            kappa: 4.0,
            hurst: None,
            reinforce: None,
        }
    }
}

impl ProcessConfig {
    pub fn driving_kind(&self) -> Result<DrivingKind, CliError> {
        match self.kind {
            Kind::Sle => Ok(DrivingKind::StandardBm),
            Kind::Nrsle => self
                .reinforce
                .map(|p| DrivingKind::NoiseReinforced { p })
                .ok_or_else(|| CliError::Validation("nrsle needs --reinforce".into())),
            Kind::Fsle => self
                .hurst
                .map(|hurst| DrivingKind::Fractional { hurst })
                .ok_or_else(|| CliError::Validation("fsle needs --hurst".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    #[serde(flatten)]
    pub process: ProcessConfig,
    #[serde(flatten)]
    pub schedule: ScheduleConfig,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
    /// Also write the raw driving path here.
    pub driving_out: Option<PathBuf>,
    /// Translate the trace by the terminal driving force.
    pub real_shift: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            process: ProcessConfig::default(),
            schedule: ScheduleConfig::new(1 << 14),
            seed: 0,
            workers: 0,
            out: "trace.csv".into(),
            svg: None,
            driving_out: None,
            real_shift: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MomentsMethod {
    Quadrature,
    Ensemble,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentsConfig {
    pub kappa: f64,
    #[serde(flatten)]
    pub schedule: ScheduleConfig,
    pub method: MomentsMethod,
    pub paths: usize,
    /// Evenly spaced check times for the ensemble, the last at `T`.
    pub sample_points: usize,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            kappa: 4.0,
            schedule: ScheduleConfig {
                y0: 0.1,
                ..ScheduleConfig::new(256)
            },
            method: MomentsMethod::Quadrature,
            paths: 10_000,
            sample_points: 1,
            seed: 0,
            workers: 0,
            out: "moments.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergeConfig {
    pub kappa: f64,
    pub y0: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub levels: Vec<usize>,
    pub paths: usize,
    pub reference: ConvergenceReference,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            kappa: 2.0,
            y0: 0.01,
            horizon: 1.0,
            levels: (8..=13).map(|e| 1 << e).collect(),
            paths: 20,
            reference: ConvergenceReference::SelfConsistent,
            seed: 0,
            workers: 0,
            out: "converge.csv".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Box,
    Yardstick,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DimensionConfig {
    /// Trace CSVs to measure; when empty, `paths` traces are simulated.
    pub inputs: Vec<PathBuf>,
    #[serde(flatten)]
    pub process: ProcessConfig,
    #[serde(flatten)]
    pub schedule: ScheduleConfig,
    pub paths: usize,
    pub estimator: Estimator,
    pub scale: ScaleSpec,
    pub ruler: RulerSpec,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        DimensionConfig {
            inputs: Vec::new(),
            process: ProcessConfig::default(),
            schedule: ScheduleConfig::new(1 << 17),
            paths: 10,
            estimator: Estimator::Box,
            scale: ScaleSpec::default(),
            ruler: RulerSpec::default(),
            seed: 0,
            workers: 0,
            out: "dimension.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepCommandConfig {
    pub kappas: Vec<f64>,
    pub hursts: Vec<f64>,
    pub paths_per_cell: usize,
    #[serde(flatten)]
    pub schedule: ScheduleConfig,
    pub scale: ScaleSpec,
    /// Fail with the numeric exit code when a monotonicity check fails.
    pub strict: bool,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for SweepCommandConfig {
    fn default() -> Self {
        SweepCommandConfig {
            kappas: vec![3.0, 4.0, 5.0, 6.0],
            hursts: vec![0.4, 0.5, 0.6, 0.7],
            paths_per_cell: 5,
            schedule: ScheduleConfig::new(1 << 14),
            scale: ScaleSpec::default(),
            strict: false,
            seed: 0,
            workers: 0,
            out: "sweep.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterpolateConfig {
    pub input: PathBuf,
    pub exponent: f64,
    pub factor: usize,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for InterpolateConfig {
    fn default() -> Self {
        InterpolateConfig {
            input: PathBuf::new(),
            exponent: 1.0,
            factor: 8,
            seed: 0,
            workers: 0,
            out: "interpolated.csv".into(),
        }
    }
}
