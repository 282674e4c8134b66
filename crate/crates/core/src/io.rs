//! CSV, JSON sidecar and SVG output.
//!
//! Floats are written with 17 significant digits so every double survives a
//! write/read round trip bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::driving::{DrivingKind, DrivingPath, Mesh, Scaling};
use crate::splitting::{Trace, TraceOrigin};
use crate::{ComplexPoint, Error, Result, GENERATOR_VERSION};

pub const TRACE_HEADER: [&str; 3] = ["t", "re", "im"];
pub const DRIVING_HEADER: [&str; 2] = ["t", "value"];
pub const SWEEP_HEADER: [&str; 6] = ["kappa", "hurst", "mean_df", "stderr", "paths", "M"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: '{field}' is not a number")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_trace_csv<W: Write>(out: W, trace: &Trace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for (t, z) in trace.times.iter().zip(&trace.points) {
        w.write_record([fmt_f64(*t), fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            header.join(","),
            got.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::Parse(format!(
                "line {line}: expected {} fields",
                header.len()
            )));
        }
        rows.push(
            rec.iter()
                .map(|f| parse_f64(f, line))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok(rows)
}

/// Reads a `t,re,im` CSV into an external trace.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Trace> {
    let rows = read_rows(input, &TRACE_HEADER)?;
    let times = rows.iter().map(|r| r[0]).collect();
    let points = rows.iter().map(|r| ComplexPoint::new(r[1], r[2])).collect();
    Trace::new(times, points, TraceOrigin::External)
}

pub fn write_driving_csv<W: Write>(out: W, path: &DrivingPath) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DRIVING_HEADER)?;
    for (t, v) in path.times().iter().zip(&path.values) {
        w.write_record([fmt_f64(*t), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,value` CSV. Process metadata is not part of the CSV; the
/// caller supplies it (see [`load_driving`] for the sidecar-aware variant).
pub fn read_driving_csv<R: Read>(
    input: R,
    kind: DrivingKind,
    seed: u64,
    scaling: Scaling,
) -> Result<DrivingPath> {
    let rows = read_rows(input, &DRIVING_HEADER)?;
    let mesh = Mesh::new(rows.iter().map(|r| r[0]).collect())?;
    DrivingPath::new(
        mesh,
        rows.iter().map(|r| r[1]).collect(),
        kind,
        seed,
        scaling,
    )
}

/// The JSON sidecar next to a CSV: same stem, `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Sidecar metadata: the generator version plus caller-provided fields.
pub fn metadata(fields: Value) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("generator".into(), Value::String(GENERATOR_VERSION.into()));
    match fields {
        Value::Object(o) => m.extend(o),
        other => {
            m.insert("data".into(), other);
        }
    }
    Value::Object(m)
}

pub fn save_trace(csv_path: &Path, trace: &Trace, extra: Value) -> Result<()> {
    let mut w = create(csv_path)?;
    write_trace_csv(&mut w, trace)?;
    w.flush()?;
    let mut fields = serde_json::json!({ "origin": trace.origin, "points": trace.len() });
    if let (Value::Object(f), Value::Object(e)) = (&mut fields, extra) {
        f.extend(e);
    }
    write_json(&sidecar_path(csv_path), &metadata(fields))
}

pub fn load_trace(csv_path: &Path) -> Result<Trace> {
    read_trace_csv(File::open(csv_path)?)
}

pub fn save_driving(csv_path: &Path, path: &DrivingPath, extra: Value) -> Result<()> {
    let mut w = create(csv_path)?;
    write_driving_csv(&mut w, path)?;
    w.flush()?;
    let mut fields = serde_json::json!({
        "kind": path.kind,
        "seed": path.seed,
        "scaling": path.scaling,
        "points": path.values.len(),
    });
    if let (Value::Object(f), Value::Object(e)) = (&mut fields, extra) {
        f.extend(e);
    }
    write_json(&sidecar_path(csv_path), &metadata(fields))
}

/// Reads a driving CSV, taking kind, seed and scaling from its sidecar when
/// present and defaulting to a raw standard Brownian path otherwise.
pub fn load_driving(csv_path: &Path) -> Result<DrivingPath> {
    let side = sidecar_path(csv_path);
    let (mut kind, mut seed, mut scaling) = (DrivingKind::StandardBm, 0, Scaling::Raw);
    if side.exists() {
        let v: Value = serde_json::from_reader(File::open(&side)?)?;
        if let Some(k) = v.get("kind") {
            kind = serde_json::from_value(k.clone())?;
        }
        if let Some(s) = v.get("seed").and_then(Value::as_u64) {
            seed = s;
        }
        if let Some(s) = v.get("scaling") {
            scaling = serde_json::from_value(s.clone())?;
        }
    }
    read_driving_csv(File::open(csv_path)?, kind, seed, scaling)
}

/// Writes sweep rows `kappa,hurst,mean_df,stderr,paths,M`.
pub fn write_sweep_csv<W: Write>(out: W, table: &crate::analysis::SweepTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for c in &table.cells {
        w.write_record([
            fmt_f64(c.kappa),
            fmt_f64(c.hurst),
            fmt_f64(c.mean_df),
            fmt_f64(c.stderr),
            c.paths.to_string(),
            c.steps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut w = create(path)?;
    write(&mut w)?;
    w.flush()?;
    Ok(())
}

/// A standalone SVG with the polyline, y axis pointing up, view box fitted
/// to the bounding box plus a 5% margin, stroke width `diag / 2000`.
pub fn trace_svg(points: &[ComplexPoint]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Degenerate("no points to draw".into()));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let diag = (x1 - x0).hypot(y1 - y0);
    let diag = if diag > 0.0 { diag } else { 1.0 };
    let margin = 0.05 * diag;
    let (vx, vy) = (x0 - margin, -y1 - margin);
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let mut s = String::with_capacity(points.len() * 24 + 256);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vx} {vy} {vw} {vh}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linejoin=\"round\" points=\"",
        diag / 2000.0
    ));
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&format!("{},{}", p.re, -p.im));
    }
    s.push_str("\"/>\n</svg>\n");
    Ok(s)
}
