use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sle_core::analysis::{
    coupled_convergence, interpolation_convergence, ConvergenceConfig, ConvergenceReference,
    InterpolationConfig,
};
use sle_core::driving::{sample_bm, DrivingKind, DrivingPath, Mesh, Scaling};
use sle_core::halfplane::slit_reverse;
use sle_core::reference::{
    euler_reverse, exact_piecewise_trace, exact_splitting_states, forward_point,
    PiecewiseConstantDriving,
};
use sle_core::splitting::{sle_step, split_states, LoewnerDrift};
use sle_core::ComplexPoint;

fn c(re: f64, im: f64) -> ComplexPoint {
    ComplexPoint::new(re, im)
}

#[test]
fn exact_composition_reproduces_splitting_bitwise() {
    for log_m in 8..=14 {
        let mesh = Mesh::uniform(1.0, 1 << log_m).unwrap();
        for seed in 0..3 {
            let force = sample_bm(&mesh, seed).to_force(2.0).unwrap();
            let z0 = c(0.0, 0.01);
            let split = split_states(z0, &force, &LoewnerDrift).unwrap();
            let exact = exact_splitting_states(z0, &force).unwrap();
            assert_eq!(split, exact, "M = 2^{log_m}, seed {seed}");
        }
    }
}

#[test]
fn one_step_is_slit_translate_slit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let z = c(rng.random_range(-3.0..3.0), rng.random_range(0.01..3.0));
        let h: f64 = 10f64.powf(rng.random_range(-6.0..0.0));
        let kappa: f64 = rng.random_range(0.0..8.0);
        let db = h.sqrt() * rng.random_range(-3.0..3.0);
        let shift = kappa.sqrt() * db;
        let composed = slit_reverse(slit_reverse(z, 0.0, 0.5 * h) + shift, 0.0, 0.5 * h);
        let step = sle_step(z, h, db, kappa).unwrap();
        worst = worst.max((step - composed).norm() / (composed.norm() * f64::EPSILON));
    }
    assert!(worst <= 8.0, "worst {worst} ulp");
}

/// Explicit Euler for `dW = -2/(W - xi) dt` with piecewise-constant `xi`.
fn euler_piecewise(
    z0: ComplexPoint,
    driving: &PiecewiseConstantDriving,
    substeps: usize,
) -> Vec<ComplexPoint> {
    let b = driving.breakpoints();
    let mut w = z0;
    let mut out = vec![z0];
    for (j, &level) in driving.levels().iter().enumerate() {
        let dt = (b[j + 1] - b[j]) / substeps as f64;
        for _ in 0..substeps {
            w -= 2.0 / (w - level) * dt;
        }
        out.push(w);
    }
    out
}

#[test]
fn two_level_composition_matches_fine_euler() {
    let driving = PiecewiseConstantDriving::new(vec![0.0, 0.4, 1.0], vec![0.0, 0.7]).unwrap();
    let z0 = c(0.3, 0.5);
    let exact = exact_piecewise_trace(z0, &driving);
    let euler = euler_piecewise(z0, &driving, 1_000_000);
    for (a, b) in exact.points.iter().zip(&euler) {
        assert!((a - b).norm() <= 1e-4, "{a} vs {b}");
    }
}

#[test]
fn deterministic_euler_approaches_the_ray() {
    let mesh = Mesh::uniform(1.0, 1 << 16).unwrap();
    let zero = DrivingPath::new(
        mesh.clone(),
        vec![0.0; mesh.len()],
        DrivingKind::StandardBm,
        0,
        Scaling::Raw,
    )
    .unwrap();
    let tr = euler_reverse(c(0.0, 1.0), &zero, 0.0).unwrap();
    assert!((tr.last() - c(0.0, 5f64.sqrt())).norm() <= 1e-3);
}

#[test]
fn splitting_approaches_fine_euler() {
    let config = ConvergenceConfig {
        kappa: 2.0,
        y0: 0.01,
        horizon: 1.0,
        levels: vec![64, 128, 256, 512, 1024],
        paths: 10,
        seed: 5,
        reference: ConvergenceReference::Euler {
            fine_steps: 1 << 14,
        },
    };
    let r = coupled_convergence(&config).unwrap();
    let medians: Vec<f64> = r.levels.iter().map(|l| l.median_sup).collect();
    assert!(r.decreasing, "{medians:?}");
}

#[test]
fn self_convergence_decreases() {
    let config = ConvergenceConfig {
        kappa: 2.0,
        y0: 0.01,
        horizon: 1.0,
        levels: vec![256, 512, 1024, 2048],
        paths: 20,
        seed: 1,
        reference: ConvergenceReference::SelfConsistent,
    };
    let r = coupled_convergence(&config).unwrap();
    let medians: Vec<f64> = r.levels.iter().map(|l| l.median_sup).collect();
    assert!(r.decreasing, "{medians:?}");
    assert!(medians.iter().all(|&d| d > 0.0));
}

/// Explicit Euler for the forward equation with `lambda_t = t`.
fn forward_euler_linear(z0: ComplexPoint, horizon: f64, n: usize) -> ComplexPoint {
    let dt = horizon / n as f64;
    let mut g = z0;
    for k in 0..n {
        g += 2.0 / (g - k as f64 * dt) * dt;
    }
    g
}

#[test]
fn forward_point_with_linear_driving() {
    let mesh = Mesh::uniform(0.5, 8).unwrap();
    let values = mesh.times().to_vec();
    let path = DrivingPath::new(
        mesh,
        values,
        DrivingKind::StandardBm,
        0,
        Scaling::Force { kappa: 1.0 },
    )
    .unwrap();
    let got = forward_point(c(0.0, 1.0), &path).unwrap();
    let want = forward_euler_linear(c(0.0, 1.0), 0.5, 1_000_000);
    assert!((got - want).norm() <= 1e-6, "{got} vs {want}");
}

#[test]
fn power_interpolated_driving_converges() {
    for exponent in [0.5, 1.0, 2.0] {
        let config = InterpolationConfig {
            exponent,
            kappa: 4.0,
            horizon: 1.0,
            levels: vec![16, 32, 64, 128, 256],
            fine_steps: 1024,
            test_points: vec![c(-1.0, 2.5), c(0.0, 2.5), c(1.0, 2.5), c(0.5, 3.0)],
            paths: 10,
            seed: 8,
        };
        let r = interpolation_convergence(&config).unwrap();
        assert!(r.decreasing, "p = {exponent}: {:?}", r.sup);
    }
}
