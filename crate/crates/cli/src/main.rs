//! `slesplit`: simulate Loewner traces with the splitting scheme and run the
//! moment, convergence and fractal-dimension checks.
//!
//! Every subcommand accepts `--config <file.json>` whose fields use the long
//! flag names (`T` for the horizon); flags given on the command line win.
//! Exit codes: 0 success, 1 I/O or configuration error, 2 invalid parameter,
//! 3 failed numerical check.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sle_core::analysis::ConvergenceReference;

use crate::commands::Provenance;
use crate::config::{load, set, Estimator, Kind, MomentsMethod, ProcessConfig, ScheduleConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "slesplit",
    version,
    about = "Splitting-scheme simulation of Schramm-Loewner traces"
)]
struct Cli {
    /// JSON file with the subcommand's parameters
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; path i uses a seed derived from (seed, i)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core); never changes results
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trace and write it as CSV (+ JSON sidecar, optional SVG)
    Simulate(SimulateArgs),
    /// Check the second and fourth moments against their closed forms
    Moments(MomentsArgs),
    /// Coupled-path convergence of the scheme across dyadic step counts
    Converge(ConvergeArgs),
    /// Box-counting / yardstick dimension of traces
    Dimension(DimensionArgs),
    /// Box-counting dimension of fractional SLE over a kappa x H grid
    Sweep(SweepArgs),
    /// Power-law interpolation of a driving-path CSV
    Interpolate(InterpolateArgs),
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Hurst exponent (fsle)
    #[arg(long)]
    hurst: Option<f64>,
    /// Reinforcement strength p < 1/2 (nrsle)
    #[arg(long)]
    reinforce: Option<f64>,
}

impl ProcessArgs {
    fn apply(self, c: &mut ProcessConfig) {
        set(&mut c.kind, self.kind);
        set(&mut c.kappa, self.kappa);
        if self.hurst.is_some() {
            c.hurst = self.hurst;
        }
        if self.reinforce.is_some() {
            c.reinforce = self.reinforce;
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    /// Number of steps M
    #[arg(long)]
    steps: Option<usize>,
    /// Initial height
    #[arg(long)]
    y0: Option<f64>,
    /// Time horizon
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Theory schedule with fidelity N: y0 = N^(-1/2), M = ceil(T (4N+1)^3)
    #[arg(long)]
    fidelity: Option<u64>,
}

impl ScheduleArgs {
    fn apply(self, c: &mut ScheduleConfig) {
        set(&mut c.steps, self.steps);
        set(&mut c.y0, self.y0);
        set(&mut c.horizon, self.horizon);
        if self.fidelity.is_some() {
            c.fidelity = self.fidelity;
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Also render the trace as SVG
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also write the raw driving path as CSV
    #[arg(long)]
    driving_out: Option<PathBuf>,
    /// Translate the trace by the terminal driving force
    #[arg(long)]
    real_shift: bool,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    kappa: Option<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum)]
    method: Option<MomentsMethod>,
    /// Monte Carlo paths
    #[arg(long)]
    paths: Option<usize>,
    /// Ensemble check times, evenly spaced up to T
    #[arg(long)]
    sample_points: Option<usize>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Step counts, doubling, e.g. 256,512,1024
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    #[arg(long)]
    paths: Option<usize>,
    /// Compare against Euler-Maruyama on this many steps instead of level 2M
    #[arg(long)]
    euler_steps: Option<usize>,
}

#[derive(Args)]
struct DimensionArgs {
    /// Trace CSV to measure (repeatable); without it traces are simulated
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, value_enum)]
    estimator: Option<Estimator>,
    /// Average box counts over four grid offsets
    #[arg(long)]
    multi_offset: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    kappas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    hursts: Option<Vec<f64>>,
    #[arg(long)]
    paths_per_cell: Option<usize>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Exit with code 3 when a monotonicity check fails
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct InterpolateArgs {
    /// Driving-path CSV (t,value)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Interpolation exponent p > 0
    #[arg(long)]
    exponent: Option<f64>,
    /// Sub-points per cell
    #[arg(long)]
    factor: Option<usize>,
}

struct Common {
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

macro_rules! common {
    ($cfg:expr, $common:expr) => {{
        set(&mut $cfg.seed, $common.seed);
        set(&mut $cfg.workers, $common.workers);
        set(&mut $cfg.out, $common.out);
    }};
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref();
    let common = Common {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
    };
    let prov = |command| Provenance {
        command,
        config_file: cli.config.clone(),
    };
    match cli.command {
        Command::Simulate(a) => {
            let mut c: config::SimulateConfig = load(file)?;
            a.process.apply(&mut c.process);
            a.schedule.apply(&mut c.schedule);
            if a.svg.is_some() {
                c.svg = a.svg;
            }
            if a.driving_out.is_some() {
                c.driving_out = a.driving_out;
            }
            c.real_shift |= a.real_shift;
            common!(c, common);
            sle_core::ensemble::with_workers(c.workers, || {
                commands::simulate_cmd(&c, &prov("simulate"))
            })
        }
        Command::Moments(a) => {
            let mut c: config::MomentsConfig = load(file)?;
            set(&mut c.kappa, a.kappa);
            a.schedule.apply(&mut c.schedule);
            set(&mut c.method, a.method);
            set(&mut c.paths, a.paths);
            set(&mut c.sample_points, a.sample_points);
            common!(c, common);
            sle_core::ensemble::with_workers(c.workers, || {
                commands::moments_cmd(&c, &prov("moments"))
            })
        }
        Command::Converge(a) => {
            let mut c: config::ConvergeConfig = load(file)?;
            set(&mut c.kappa, a.kappa);
            set(&mut c.y0, a.y0);
            set(&mut c.horizon, a.horizon);
            set(&mut c.levels, a.levels);
            set(&mut c.paths, a.paths);
            if let Some(fine_steps) = a.euler_steps {
                c.reference = ConvergenceReference::Euler { fine_steps };
            }
            common!(c, common);
            sle_core::ensemble::with_workers(c.workers, || {
                commands::converge_cmd(&c, &prov("converge"))
            })
        }
        Command::Dimension(a) => {
            let mut c: config::DimensionConfig = load(file)?;
            if !a.inputs.is_empty() {
                c.inputs = a.inputs;
            }
            a.process.apply(&mut c.process);
            a.schedule.apply(&mut c.schedule);
            set(&mut c.paths, a.paths);
            set(&mut c.estimator, a.estimator);
            c.scale.multi_offset |= a.multi_offset;
            common!(c, common);
            sle_core::ensemble::with_workers(c.workers, || {
                commands::dimension_cmd(&c, &prov("dimension"))
            })
        }
        Command::Sweep(a) => {
            let mut c: config::SweepCommandConfig = load(file)?;
            set(&mut c.kappas, a.kappas);
            set(&mut c.hursts, a.hursts);
            set(&mut c.paths_per_cell, a.paths_per_cell);
            a.schedule.apply(&mut c.schedule);
            c.strict |= a.strict;
            common!(c, common);
            sle_core::ensemble::with_workers(c.workers, || commands::sweep_cmd(&c, &prov("sweep")))
        }
        Command::Interpolate(a) => {
            let mut c: config::InterpolateConfig = load(file)?;
            set(&mut c.input, a.input);
            set(&mut c.exponent, a.exponent);
            set(&mut c.factor, a.factor);
            common!(c, common);
            commands::interpolate_cmd(&c, &prov("interpolate"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
