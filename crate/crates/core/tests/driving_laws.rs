use sle_core::analysis::stats::{mean, stderr};
use sle_core::driving::{
    fbm_covariance, nrbm_covariance, power_interpolate, sample_bm, sample_fbm, sample_nrbm_exact,
    sample_nrbm_sde, DrivingPath, Mesh,
};

/// Mean and standard error of `x_i * x_j` over samples of zero-mean values.
fn cross_moment(samples: &[Vec<f64>], i: usize, j: usize) -> (f64, f64) {
    let prods: Vec<f64> = samples.iter().map(|v| v[i] * v[j]).collect();
    (mean(&prods), stderr(&prods))
}

fn collect(n: u64, f: impl Fn(u64) -> DrivingPath) -> Vec<Vec<f64>> {
    (0..n).map(|s| f(s).values).collect()
}

#[test]
fn bm_terminal_variance() {
    let mesh = Mesh::uniform(1.0, 1000).unwrap();
    let samples = collect(10_000, |s| sample_bm(&mesh, s));
    let (var, se) = cross_moment(&samples, 1000, 1000);
    assert!((var - 1.0).abs() <= 3.0 * se, "var {var} se {se}");
}

#[test]
fn bm_increment_moments() {
    let mesh = Mesh::uniform(2.0, 8).unwrap();
    let h = 0.25;
    let samples = collect(10_000, |s| sample_bm(&mesh, s));
    for k in 0..8 {
        let inc: Vec<f64> = samples.iter().map(|v| v[k + 1] - v[k]).collect();
        let sq: Vec<f64> = inc.iter().map(|d| d * d).collect();
        assert!(mean(&inc).abs() <= 3.0 * stderr(&inc), "increment {k} mean");
        assert!(
            (mean(&sq) - h).abs() <= 3.0 * stderr(&sq),
            "increment {k} variance"
        );
    }
}

fn check_fbm_covariance(hurst: f64) {
    let mesh = Mesh::uniform(1.0, 16).unwrap();
    let samples = collect(10_000, |s| sample_fbm(&mesh, hurst, s).unwrap());
    let t = mesh.times();
    for i in 1..t.len() {
        for j in i..t.len() {
            let (c, se) = cross_moment(&samples, i, j);
            let want = fbm_covariance(t[i], t[j], hurst);
            assert!(
                (c - want).abs() <= 5.0 * se,
                "H={hurst} ({i},{j}): {c} vs {want} (se {se})"
            );
        }
    }
}

#[test]
fn fbm_covariance_matches_formula() {
    for h in [0.25, 0.5, 0.75] {
        check_fbm_covariance(h);
    }
}

#[test]
fn fbm_half_matches_bm_covariance() {
    let mesh = Mesh::uniform(1.0, 15).unwrap();
    let f = collect(10_000, |s| sample_fbm(&mesh, 0.5, s).unwrap());
    let b = collect(10_000, |s| sample_bm(&mesh, s + 1_000_000));
    for i in 1..16 {
        for j in i..16 {
            let (cf, sf) = cross_moment(&f, i, j);
            let (cb, sb) = cross_moment(&b, i, j);
            assert!(
                (cf - cb).abs() <= 5.0 * (sf * sf + sb * sb).sqrt(),
                "({i},{j})"
            );
        }
    }
}

#[test]
fn nrbm_exact_covariance_at_one_and_four() {
    let mesh = Mesh::new(vec![0.0, 1.0, 4.0]).unwrap();
    let samples = collect(10_000, |s| sample_nrbm_exact(&mesh, 0.25, s).unwrap());
    let (c, se) = cross_moment(&samples, 1, 2);
    let want = nrbm_covariance(1.0, 4.0, 0.25);
    assert!((want - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((c - want).abs() <= 5.0 * se, "{c} vs {want} (se {se})");
}

/// Exact covariance of the Euler recursion `X_{k+1} = (1 + p/k) X_k + dB`
/// with `Var X_1 = h/(1-2p)`, between indices `a <= b` of a uniform mesh.
fn euler_recursion_covariance(p: f64, steps: usize, a: usize, b: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let mut var = h / (1.0 - 2.0 * p);
    for k in 1..a {
        var = (1.0 + p / k as f64).powi(2) * var + h;
    }
    (a..b).fold(var, |c, k| c * (1.0 + p / k as f64))
}

#[test]
fn nrbm_samplers_agree() {
    let m = 1 << 12;
    let mesh = Mesh::uniform(1.0, m).unwrap();
    let half = m / 2;
    for p in [0.1, 0.25, 0.4] {
        let ex = collect(10_000, |s| sample_nrbm_exact(&mesh, p, s).unwrap());
        let sd = collect(10_000, |s| sample_nrbm_sde(&mesh, p, s).unwrap());
        let (ce, _) = cross_moment(&ex, half, m);
        let (cs, se) = cross_moment(&sd, half, m);
        // the Monte Carlo estimate reproduces the recursion's own law
        let recursion = euler_recursion_covariance(p, m, half, m);
        assert!(
            (cs - recursion).abs() <= 5.0 * se,
            "p={p}: sde {cs} recursion {recursion}"
        );
        let bias = recursion / nrbm_covariance(0.5, 1.0, p) - 1.0;
        if p < 0.4 {
            assert!(
                (cs - ce).abs() <= 0.03 * ce.abs(),
                "p={p}: exact {ce} sde {cs}"
            );
        } else {
            // Euler's O(h^(1-2p)) bias alone exceeds 3% here
            assert!(bias > 0.03, "p={p}: bias {bias}");
        }
    }
}

#[test]
fn nrbm_sde_covariance_near_formula() {
    let m = 1 << 12;
    let mesh = Mesh::uniform(1.0, m).unwrap();
    let sd = collect(10_000, |s| sample_nrbm_sde(&mesh, 0.2, s).unwrap());
    let (c, _) = cross_moment(&sd, m / 2, m);
    let want = nrbm_covariance(0.5, 1.0, 0.2);
    assert!((c - want).abs() <= 0.03 * want, "{c} vs {want}");
}

#[test]
fn nrbm_at_zero_is_bm() {
    let mesh = Mesh::uniform(1.0, 64).unwrap();
    for seed in 0..20 {
        let b = sample_bm(&mesh, seed);
        let e = sample_nrbm_exact(&mesh, 0.0, seed).unwrap();
        let s = sample_nrbm_sde(&mesh, 0.0, seed).unwrap();
        for k in 0..=64 {
            assert!((e.values[k] - b.values[k]).abs() < 1e-12);
            assert!((s.values[k] - b.values[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn power_interpolant_keeps_every_mesh_value() {
    let mesh = Mesh::uniform(1.0, 32).unwrap();
    let path = sample_bm(&mesh, 9);
    for p in [0.5, 1.0, 2.0, 3.7] {
        let fine = power_interpolate(&path, p, 8).unwrap();
        for k in 0..=32 {
            assert_eq!(fine.values[8 * k], path.values[k]);
        }
    }
}
