use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slesplit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slesplit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = slesplit(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&read(dir, name)).unwrap()
}

/// Runs `args` twice with different worker counts and returns the bytes of
/// `file` from both runs.
fn twice(args: &[&str], file: &str) -> (Vec<u8>, Vec<u8>) {
    let dir = tempfile::tempdir().unwrap();
    let mut a = args.to_vec();
    a.extend(["--workers", "1"]);
    ok(dir.path(), &a);
    let first = read(dir.path(), file);
    let mut b = args.to_vec();
    b.extend(["--workers", "3"]);
    ok(dir.path(), &b);
    (first, read(dir.path(), file))
}

#[test]
fn simulate_is_reproducible() {
    for kind in [
        &["--kind", "sle"][..],
        &["--kind", "nrsle", "--reinforce", "0.3"],
        &["--kind", "fsle", "--hurst", "0.7"],
    ] {
        let mut args = vec![
            "simulate", "--kappa", "4", "--steps", "2048", "--seed", "7", "--out", "tr.csv",
        ];
        args.extend(kind);
        let (a, b) = twice(&args, "tr.csv");
        assert_eq!(a, b, "{kind:?}");
    }
}

#[test]
fn simulate_writes_svg_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate", "--kind", "fsle", "--kappa", "4", "--hurst", "0.7", "--steps", "512",
            "--out", "f.csv", "--svg", "f.svg",
        ],
    );
    let meta = json(d, "f.json");
    assert_eq!(meta["config"]["hurst"], 0.7);
    assert_eq!(meta["config"]["steps"], 512);
    assert!(meta["substep_policy"]["method"].is_string());
    assert!(String::from_utf8(read(d, "f.svg"))
        .unwrap()
        .starts_with("<svg"));
    let csv = String::from_utf8(read(d, "f.csv")).unwrap();
    assert_eq!(csv.lines().count(), 514);
    assert_eq!(csv.lines().next(), Some("t,re,im"));
}

#[test]
fn real_shift_translates_by_terminal_force() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = ["simulate", "--steps", "256", "--seed", "3"];
    ok(d, &[&base[..], &["--out", "a.csv"]].concat());
    ok(
        d,
        &[&base[..], &["--out", "b.csv", "--real-shift"]].concat(),
    );
    let a = sle_core::io::load_trace(&d.join("a.csv")).unwrap();
    let b = sle_core::io::load_trace(&d.join("b.csv")).unwrap();
    let shift = json(d, "b.json")["real_shift"].as_f64().unwrap();
    assert!(shift != 0.0);
    assert_eq!(b.points[0].re, a.points[0].re + shift);
}

#[test]
fn invalid_reinforcement_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = slesplit(
        dir.path(),
        &["simulate", "--kind", "nrsle", "--reinforce", "0.6"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reinforcement strength must be < 1/2"));
}

#[test]
fn missing_process_parameter_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        slesplit(dir.path(), &["simulate", "--kind", "fsle"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        slesplit(dir.path(), &["simulate", "--y0", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"kapa": 2}"#).unwrap();
    assert_eq!(
        slesplit(d, &["moments", "--config", "bad.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        slesplit(d, &["moments", "--config", "missing.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        slesplit(d, &["dimension", "--input", "missing.csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("c.json"),
        r#"{"kappa": 2, "steps": 64, "y0": 0.2, "seed": 5}"#,
    )
    .unwrap();
    ok(
        d,
        &[
            "moments", "--config", "c.json", "--kappa", "6", "--out", "m.json",
        ],
    );
    let meta = json(d, "m.json");
    assert_eq!(meta["config"]["kappa"], 6.0);
    assert_eq!(meta["config"]["steps"], 64);
    assert_eq!(meta["config"]["y0"], 0.2);
    assert_eq!(meta["config"]["seed"], 5);
    assert_eq!(meta["config_file"], "c.json");
    let second = &meta["quadrature"]["second"];
    let last = second[second.as_array().unwrap().len() - 1][0]
        .as_f64()
        .unwrap();
    assert!((last - (-0.04 + 2.0)).abs() <= 1e-10);
}

#[test]
fn moments_quadrature_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "moments", "--kappa", "6", "--y0", "0.1", "--steps", "256", "--out", "m.json",
        ],
    );
    let fourth = &json(d, "m.json")["quadrature"]["fourth"];
    let last = fourth[fourth.as_array().unwrap().len() - 1][0]
        .as_f64()
        .unwrap();
    assert!((last - 27.7201).abs() <= 1e-9);
}

#[test]
fn converge_is_reproducible_and_exact_without_noise() {
    let args = [
        "converge",
        "--levels",
        "64,128,256",
        "--paths",
        "6",
        "--seed",
        "4",
        "--out",
        "c.csv",
    ];
    let (a, b) = twice(&args, "c.csv");
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "converge",
            "--kappa",
            "0",
            "--levels",
            "64,128,256",
            "--paths",
            "2",
            "--out",
            "c.csv",
        ],
    );
    let report = &json(d, "c.json")["report"];
    for level in report["levels"].as_array().unwrap() {
        assert!(level["median_sup"].as_f64().unwrap() < 1e-13);
    }
}

#[test]
fn dimension_is_reproducible() {
    let args = [
        "dimension",
        "--kappa",
        "4",
        "--steps",
        "4096",
        "--paths",
        "3",
        "--estimator",
        "both",
        "--out",
        "d.json",
    ];
    let (a, b) = twice(&args, "d.json");
    assert_eq!(a, b);
}

#[test]
fn dimension_of_a_straight_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("t,re,im\n");
    for k in 0..2000 {
        let x = k as f64 / 1999.0;
        csv.push_str(&format!("{x},{x},{}\n", 0.5 * x));
    }
    std::fs::write(d.join("line.csv"), csv).unwrap();
    ok(d, &["dimension", "--input", "line.csv", "--out", "d.json"]);
    let slope = json(d, "d.json")["box_counting"]["mean"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.05, "{slope}");
}

#[test]
fn sweep_is_reproducible() {
    let args = [
        "sweep",
        "--kappas",
        "3,6",
        "--hursts",
        "0.5,0.7",
        "--paths-per-cell",
        "2",
        "--steps",
        "1024",
        "--out",
        "s.csv",
    ];
    let (a, b) = twice(&args, "s.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("kappa,hurst,mean_df,stderr,paths,M")
    );
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn interpolate_is_reproducible_and_keeps_mesh_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--steps",
            "128",
            "--out",
            "tr.csv",
            "--driving-out",
            "drv.csv",
        ],
    );
    let args = [
        "interpolate",
        "--input",
        "drv.csv",
        "--exponent",
        "0.5",
        "--factor",
        "4",
        "--out",
        "i.csv",
    ];
    ok(d, &args);
    let first = read(d, "i.csv");
    ok(d, &args);
    assert_eq!(first, read(d, "i.csv"));
    let coarse = sle_core::io::load_driving(&d.join("drv.csv")).unwrap();
    let fine = sle_core::io::load_driving(&d.join("i.csv")).unwrap();
    assert_eq!(fine.values.len(), 4 * 128 + 1);
    for k in 0..=128 {
        assert_eq!(fine.values[4 * k], coarse.values[k]);
    }
}
