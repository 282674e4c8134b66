use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};
use sle_core::analysis::stats::{mean, stderr};
use sle_core::analysis::{
    box_dimension, coupled_convergence, dimension_sweep, ensemble_moments, quadrature_moments,
    yardstick_dimension, ConvergenceConfig, DimensionFit, MomentReport, SweepConfig,
};
use sle_core::driving::{power_interpolate, DrivingSpec};
use sle_core::ensemble::map_indexed;
use sle_core::io;
use sle_core::rng::derive_seed;
use sle_core::splitting::{simulate, simulate_with_driving, SubstepPolicy, Trace};
use sle_core::Result as CoreResult;

use crate::config::{
    ConvergeConfig, DimensionConfig, Estimator, InterpolateConfig, Kind, MomentsConfig,
    MomentsMethod, SimulateConfig, SweepCommandConfig,
};
use crate::error::CliError;

/// Where the effective configuration came from, for the metadata echo.
pub struct Provenance {
    pub command: &'static str,
    pub config_file: Option<PathBuf>,
}

impl Provenance {
    fn metadata<T: Serialize>(&self, config: &T, extra: Value) -> Value {
        let mut m = json!({
            "command": self.command,
            "config": config,
            "config_file": self.config_file.as_ref().map(|p| p.display().to_string()),
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut m, extra) {
            m.extend(e);
        }
        m
    }
}

pub fn simulate_cmd(cfg: &SimulateConfig, prov: &Provenance) -> Result<(), CliError> {
    let spec = DrivingSpec::new(cfg.process.driving_kind()?, cfg.process.kappa, cfg.seed)?;
    let schedule = cfg.schedule.schedule()?;
    let (mut trace, raw) = simulate_with_driving(&spec, &schedule)?;
    let mut extra = json!({});
    if cfg.real_shift {
        let shift = spec.force_scale() * raw.values[raw.values.len() - 1];
        trace = trace.shifted(shift);
        extra["real_shift"] = json!(shift);
    }
    if cfg.process.kind == Kind::Fsle {
        extra["substep_policy"] =
            serde_json::to_value(SubstepPolicy::default()).map_err(sle_core::Error::from)?;
    }
    io::save_trace(&cfg.out, &trace, prov.metadata(cfg, extra))?;
    if let Some(svg) = &cfg.svg {
        let text = io::trace_svg(&trace.points)?;
        std::fs::write(svg, text).map_err(sle_core::Error::from)?;
    }
    if let Some(path) = &cfg.driving_out {
        io::save_driving(path, &raw, prov.metadata(cfg, json!({})))?;
    }
    println!("wrote {} ({} points)", cfg.out.display(), trace.len());
    Ok(())
}

fn describe_breaches(name: &str, r: &MomentReport) -> Option<String> {
    if r.pass {
        return None;
    }
    let times: Vec<String> = r
        .breaches
        .iter()
        .map(|&k| format!("t = {}", r.times[k]))
        .collect();
    Some(format!(
        "{name} moment check failed at {}",
        times.join(", ")
    ))
}

pub fn moments_cmd(cfg: &MomentsConfig, prov: &Provenance) -> Result<(), CliError> {
    let schedule = cfg.schedule.schedule()?;
    let mut out = serde_json::Map::new();
    let mut failures = Vec::new();
    if matches!(cfg.method, MomentsMethod::Quadrature | MomentsMethod::Both) {
        let r = quadrature_moments(cfg.kappa, &schedule)?;
        println!(
            "quadrature: max deviation {:.3e} (second), {:.3e} (fourth)",
            r.max_deviation_second, r.max_deviation_fourth
        );
        failures.extend(describe_breaches("quadrature", &r));
        out.insert(
            "quadrature".into(),
            serde_json::to_value(&r).map_err(sle_core::Error::from)?,
        );
    }
    if matches!(cfg.method, MomentsMethod::Ensemble | MomentsMethod::Both) {
        let r = ensemble_moments(cfg.kappa, &schedule, cfg.paths, cfg.seed, cfg.sample_points)?;
        println!(
            "ensemble ({} paths): max deviation {:.3e} (second), {:.3e} (fourth)",
            cfg.paths, r.max_deviation_second, r.max_deviation_fourth
        );
        failures.extend(describe_breaches("ensemble", &r));
        out.insert(
            "ensemble".into(),
            serde_json::to_value(&r).map_err(sle_core::Error::from)?,
        );
    }
    io::write_json(
        &cfg.out,
        &io::metadata(prov.metadata(cfg, Value::Object(out))),
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Breach(failures.join("; ")))
    }
}

pub fn converge_cmd(cfg: &ConvergeConfig, prov: &Provenance) -> Result<(), CliError> {
    let report = coupled_convergence(&ConvergenceConfig {
        kappa: cfg.kappa,
        y0: cfg.y0,
        horizon: cfg.horizon,
        levels: cfg.levels.clone(),
        paths: cfg.paths,
        seed: cfg.seed,
        reference: cfg.reference,
    })?;
    io::save_file(&cfg.out, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["M", "median_sup", "median_l2"])?;
        for l in &report.levels {
            csv.write_record([
                l.steps.to_string(),
                io::fmt_f64(l.median_sup),
                io::fmt_f64(l.median_l2),
            ])?;
            println!(
                "M = {:>7}: median sup {:.4e}, median L2 {:.4e}",
                l.steps, l.median_sup, l.median_l2
            );
        }
        csv.flush()?;
        Ok(())
    })?;
    let report_json = serde_json::to_value(&report).map_err(sle_core::Error::from)?;
    io::write_json(
        &io::sidecar_path(&cfg.out),
        &io::metadata(prov.metadata(cfg, json!({ "report": report_json }))),
    )?;
    if let Some(order) = report.empirical_order {
        println!("empirical order {order:.3}");
    }
    if report.decreasing {
        Ok(())
    } else {
        Err(CliError::Breach(
            "median distances are not strictly decreasing across levels".into(),
        ))
    }
}

#[derive(Serialize)]
struct Measured {
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    box_counting: Option<DimensionFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    yardstick: Option<DimensionFit>,
}

fn summary(fits: &[Option<DimensionFit>]) -> Value {
    let slopes: Vec<f64> = fits.iter().flatten().map(|f| f.slope).collect();
    if slopes.is_empty() {
        return Value::Null;
    }
    json!({ "mean": mean(&slopes), "stderr": stderr(&slopes), "count": slopes.len() })
}

pub fn dimension_cmd(cfg: &DimensionConfig, prov: &Provenance) -> Result<(), CliError> {
    let measure = |source: String, trace: &Trace| -> CoreResult<Measured> {
        let box_counting = match cfg.estimator {
            Estimator::Box | Estimator::Both => Some(box_dimension(&trace.points, &cfg.scale)?),
            Estimator::Yardstick => None,
        };
        let yardstick = match cfg.estimator {
            Estimator::Yardstick | Estimator::Both => {
                Some(yardstick_dimension(&trace.points, &cfg.ruler)?)
            }
            Estimator::Box => None,
        };
        Ok(Measured {
            source,
            box_counting,
            yardstick,
        })
    };
    let measured: Vec<CoreResult<Measured>> = if cfg.inputs.is_empty() {
        let kind = cfg.process.driving_kind()?;
        let schedule = cfg.schedule.schedule()?;
        DrivingSpec::new(kind, cfg.process.kappa, cfg.seed)?;
        map_indexed(cfg.paths, |i| {
            let spec = DrivingSpec::new(kind, cfg.process.kappa, derive_seed(cfg.seed, i as u64))?;
            measure(format!("path {i}"), &simulate(&spec, &schedule)?)
        })
    } else {
        cfg.inputs
            .iter()
            .map(|p| measure(p.display().to_string(), &io::load_trace(p)?))
            .collect()
    };
    let measured = measured.into_iter().collect::<CoreResult<Vec<_>>>()?;
    let boxes: Vec<Option<DimensionFit>> =
        measured.iter().map(|m| m.box_counting.clone()).collect();
    let yards: Vec<Option<DimensionFit>> = measured.iter().map(|m| m.yardstick.clone()).collect();
    let (box_summary, yard_summary) = (summary(&boxes), summary(&yards));
    for (name, s) in [("box-counting", &box_summary), ("yardstick", &yard_summary)] {
        if !s.is_null() {
            let (m, se) = (
                s["mean"].as_f64().unwrap_or(f64::NAN),
                s["stderr"].as_f64().unwrap_or(f64::NAN),
            );
            println!("{name}: mean {m:.4} +- {se:.4} over {}", s["count"]);
        }
    }
    let extra = json!({ "fits": measured, "box_counting": box_summary, "yardstick": yard_summary });
    io::write_json(&cfg.out, &io::metadata(prov.metadata(cfg, extra)))?;
    Ok(())
}

pub fn sweep_cmd(cfg: &SweepCommandConfig, prov: &Provenance) -> Result<(), CliError> {
    let table = dimension_sweep(&SweepConfig {
        kappas: cfg.kappas.clone(),
        hursts: cfg.hursts.clone(),
        paths_per_cell: cfg.paths_per_cell,
        schedule: cfg.schedule.schedule()?,
        seed: cfg.seed,
        scale: cfg.scale.clone(),
    })?;
    io::save_file(&cfg.out, |w| io::write_sweep_csv(w, &table))?;
    let table_json = serde_json::to_value(&table).map_err(sle_core::Error::from)?;
    io::write_json(
        &io::sidecar_path(&cfg.out),
        &io::metadata(prov.metadata(cfg, json!({ "table": table_json }))),
    )?;
    for c in &table.cells {
        if !c.failures.is_empty() {
            eprintln!(
                "kappa {} H {}: {} failed paths: {}",
                c.kappa,
                c.hurst,
                c.failures.len(),
                c.failures.join("; ")
            );
        }
    }
    let fmt = |t: Option<f64>| t.map_or("n/a".to_string(), |t| format!("{t:.3}"));
    println!(
        "Kendall tau: D_f vs kappa {} ({}), -D_f vs H {} ({})",
        fmt(table.tau_kappa),
        if table.pass_kappa { "pass" } else { "fail" },
        fmt(table.tau_hurst),
        if table.pass_hurst { "pass" } else { "fail" },
    );
    if cfg.strict && !(table.pass_kappa && table.pass_hurst) {
        return Err(CliError::Breach(
            "sweep monotonicity below the Kendall tau threshold".into(),
        ));
    }
    Ok(())
}

pub fn interpolate_cmd(cfg: &InterpolateConfig, prov: &Provenance) -> Result<(), CliError> {
    if cfg.input.as_os_str().is_empty() {
        return Err(CliError::Config("interpolate needs --input".into()));
    }
    let path = io::load_driving(&cfg.input)?;
    let fine = power_interpolate(&path, cfg.exponent, cfg.factor)?;
    io::save_driving(&cfg.out, &fine, prov.metadata(cfg, json!({})))?;
    println!("wrote {} ({} points)", cfg.out.display(), fine.values.len());
    Ok(())
}
