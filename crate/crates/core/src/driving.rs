//! Driving processes: standard, noise-reinforced and fractional Brownian
//! motion sampled on a time mesh, plus dyadic refinement and power-law
//! interpolation of sampled paths.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{aux_stream, path_stream};
use crate::{Error, Result};

/// Lower bound on the reinforcement strength. The exact sampler warps time
/// by `t^(1-2p)`, which overflows on long horizons for very negative `p`.
pub const MIN_REINFORCEMENT: f64 = -10.0;

const UNIFORM_RTOL: f64 = 1e-9;

/// Strictly increasing sample times starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Mesh {
    times: Vec<f64>,
}

impl Mesh {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        match times.first() {
            None => return Err(Error::InvalidMesh("no points".into())),
            Some(&t0) if t0 != 0.0 => {
                return Err(Error::InvalidMesh(format!(
                    "first time is {t0}, expected 0"
                )))
            }
            _ => {}
        }
        if let Some(k) = times
            .windows(2)
            .position(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::InvalidMesh(format!(
                "times not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Mesh { times })
    }

    /// `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidMesh(
                "a uniform mesh needs at least one step".into(),
            ));
        }
        let n = steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| horizon * k as f64 / n).collect();
        times[steps] = horizon;
        Ok(Mesh { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of intervals.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Largest gap between consecutive times (0 for a single point).
    pub fn mesh_size(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        if self.steps() == 0 {
            return false;
        }
        let h = self.horizon() / self.steps() as f64;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_RTOL * h)
    }

    /// Common step of a uniform mesh.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.is_uniform() {
            Ok(self.horizon() / self.steps() as f64)
        } else {
            Err(Error::InvalidMesh("a uniform mesh is required".into()))
        }
    }
}

impl TryFrom<Vec<f64>> for Mesh {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Mesh::new(times)
    }
}

impl From<Mesh> for Vec<f64> {
    fn from(mesh: Mesh) -> Self {
        mesh.times
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum DrivingKind {
    StandardBm,
    /// Noise-reinforced BM with reinforcement strength `p < 1/2`.
    NoiseReinforced {
        p: f64,
    },
    /// Fractional BM with Hurst exponent `0 < H < 1`.
    Fractional {
        hurst: f64,
    },
}

impl DrivingKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DrivingKind::StandardBm => Ok(()),
            DrivingKind::NoiseReinforced { p } => check_reinforcement(p),
            DrivingKind::Fractional { hurst } => check_hurst(hurst),
        }
    }

    /// Multiplier turning raw samples into the driving force:
    /// `sqrt(kappa)` for Brownian drivers, `kappa^H` for fractional ones.
    pub fn force_scale(&self, kappa: f64) -> f64 {
        match *self {
            DrivingKind::Fractional { hurst } if hurst != 0.5 => kappa.powf(hurst),
            _ => kappa.sqrt(),
        }
    }
}

pub(crate) fn check_reinforcement(p: f64) -> Result<()> {
    if !(p < 0.5) {
        return Err(Error::validation("reinforcement strength must be < 1/2"));
    }
    if !(p > MIN_REINFORCEMENT) {
        return Err(Error::validation(format!(
            "reinforcement strength must be > {MIN_REINFORCEMENT}"
        )));
    }
    Ok(())
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::validation("Hurst exponent must lie in (0, 1)"))
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("kappa must be finite and >= 0"))
    }
}

/// Full parameterisation of a driving process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingSpec {
    pub kind: DrivingKind,
    pub kappa: f64,
    pub seed: u64,
}

impl DrivingSpec {
    pub fn new(kind: DrivingKind, kappa: f64, seed: u64) -> Result<Self> {
        let spec = DrivingSpec { kind, kappa, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        self.kind.validate()
    }

    /// Raw (unscaled) sample of this process on `mesh`.
    pub fn sample(&self, mesh: &Mesh) -> Result<DrivingPath> {
        self.validate()?;
        match self.kind {
            DrivingKind::StandardBm => Ok(sample_bm(mesh, self.seed)),
            DrivingKind::NoiseReinforced { p } => sample_nrbm_exact(mesh, p, self.seed),
            DrivingKind::Fractional { hurst } => sample_fbm(mesh, hurst, self.seed),
        }
    }

    pub fn force_scale(&self) -> f64 {
        self.kind.force_scale(self.kappa)
    }
}

/// Whether path values are raw process samples or the scaled driving force.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scaling", rename_all = "snake_case")]
pub enum Scaling {
    Raw,
    Force { kappa: f64 },
}

/// Sampled driving path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath {
    pub mesh: Mesh,
    pub values: Vec<f64>,
    pub kind: DrivingKind,
    pub seed: u64,
    pub scaling: Scaling,
}

impl DrivingPath {
    pub fn new(
        mesh: Mesh,
        values: Vec<f64>,
        kind: DrivingKind,
        seed: u64,
        scaling: Scaling,
    ) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::validation(format!(
                "{} values for a mesh of {} points",
                values.len(),
                mesh.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::validation("driving paths start at 0"));
        }
        Ok(DrivingPath {
            mesh,
            values,
            kind,
            seed,
            scaling,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.mesh.times()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// The driving force `scale * values` for diffusivity `kappa`.
    ///
    /// Fails if the path is already scaled.
    pub fn to_force(&self, kappa: f64) -> Result<DrivingPath> {
        check_kappa(kappa)?;
        if self.scaling != Scaling::Raw {
            return Err(Error::validation("path is already scaled"));
        }
        let s = self.kind.force_scale(kappa);
        Ok(DrivingPath {
            values: self.values.iter().map(|v| s * v).collect(),
            scaling: Scaling::Force { kappa },
            ..self.clone()
        })
    }

    /// Piecewise-linear value at `t`, clamped to the mesh range.
    pub fn value_at(&self, t: f64) -> f64 {
        let times = self.mesh.times();
        if t <= times[0] {
            return self.values[0];
        }
        let last = times.len() - 1;
        if t >= times[last] {
            return self.values[last];
        }
        let k = times.partition_point(|&s| s <= t) - 1;
        let w = (t - times[k]) / (times[k + 1] - times[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Brownian motion sampled at `times` (which start at 0) from `rng`.
fn brownian_at(times: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    for k in 0..times.len() - 1 {
        let prev = values[k];
        values.push(prev + (times[k + 1] - times[k]).sqrt() * normal(rng));
    }
    values
}

/// Standard Brownian motion on `mesh`; a pure function of `(mesh, seed)`.
pub fn sample_bm(mesh: &Mesh, seed: u64) -> DrivingPath {
    let values = brownian_at(mesh.times(), &mut path_stream(seed));
    DrivingPath {
        mesh: mesh.clone(),
        values,
        kind: DrivingKind::StandardBm,
        seed,
        scaling: Scaling::Raw,
    }
}

/// Brownian-bridge refinement by a power-of-two `factor`.
///
/// Existing values are kept bit-for-bit; each doubling inserts midpoints with
/// mean equal to the endpoint average and variance `h/4`. The random numbers
/// for a doubling come from an auxiliary stream keyed by the current number
/// of intervals, so refining by 4 equals refining by 2 twice.
pub fn refine_bm(path: &DrivingPath, factor: usize) -> Result<DrivingPath> {
    if factor == 0 || !factor.is_power_of_two() {
        return Err(Error::validation(format!(
            "refinement factor {factor} is not a power of two"
        )));
    }
    if path.kind != DrivingKind::StandardBm {
        return Err(Error::validation(
            "only standard Brownian paths can be bridge-refined",
        ));
    }
    path.mesh.uniform_step()?;
    let mut times = path.mesh.times().to_vec();
    let mut values = path.values.clone();
    let bridge_scale = match path.scaling {
        Scaling::Raw => 1.0,
        Scaling::Force { kappa } => kappa.sqrt(),
    };
    let mut f = factor;
    while f > 1 {
        let n = times.len() - 1;
        let mut rng = aux_stream(path.seed, n as u64);
        let mut t2 = Vec::with_capacity(2 * n + 1);
        let mut v2 = Vec::with_capacity(2 * n + 1);
        for k in 0..n {
            let h = times[k + 1] - times[k];
            t2.push(times[k]);
            v2.push(values[k]);
            t2.push(0.5 * (times[k] + times[k + 1]));
            let mean = 0.5 * (values[k] + values[k + 1]);
            v2.push(mean + bridge_scale * (0.25 * h).sqrt() * normal(&mut rng));
        }
        t2.push(times[n]);
        v2.push(values[n]);
        times = t2;
        values = v2;
        f /= 2;
    }
    Ok(DrivingPath {
        mesh: Mesh::new(times)?,
        values,
        ..path.clone()
    })
}

/// Exact fractional Gaussian noise generator (Hosking / Durbin–Levinson).
///
/// Construction computes the partial autocorrelations and innovation
/// variances of unit-step fGn once; each sample then costs `O(n^2)` time and
/// `O(n)` memory.
#[derive(Debug)]
pub struct FbmSynthesizer {
    hurst: f64,
    autocov: Vec<f64>,
    reflection: Vec<f64>,
    innovation_sd: Vec<f64>,
}

impl FbmSynthesizer {
    pub fn new(increments: usize, hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        let n = increments.max(1);
        let two_h = 2.0 * hurst;
        let autocov: Vec<f64> = (0..n)
            .map(|k| {
                let k = k as f64;
                0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
            })
            .collect();
        let mut reflection = vec![0.0; n];
        let mut var = vec![0.0; n];
        var[0] = autocov[0];
        let mut phi: Vec<f64> = Vec::with_capacity(n);
        let mut next: Vec<f64> = Vec::with_capacity(n);
        for m in 1..n {
            let acc: f64 = phi
                .iter()
                .enumerate()
                .map(|(j, c)| c * autocov[m - 1 - j])
                .sum();
            let r = (autocov[m] - acc) / var[m - 1];
            let v = var[m - 1] * (1.0 - r * r);
            if !(r.abs() < 1.0) || !(v > 0.0) {
                return Err(Error::NotPositiveDefinite { index: m, hurst });
            }
            next.clear();
            next.extend((0..phi.len()).map(|j| phi[j] - r * phi[phi.len() - 1 - j]));
            next.push(r);
            std::mem::swap(&mut phi, &mut next);
            reflection[m] = r;
            var[m] = v;
        }
        Ok(FbmSynthesizer {
            hurst,
            autocov,
            reflection,
            innovation_sd: var.into_iter().map(f64::sqrt).collect(),
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn len(&self) -> usize {
        self.autocov.len()
    }

    pub fn is_empty(&self) -> bool {
        self.autocov.is_empty()
    }

    /// Autocovariance of unit-step fGn at `lag`.
    pub fn autocovariance(&self, lag: usize) -> f64 {
        self.autocov[lag]
    }

    /// One sample of unit-step fGn drawn from `rng`.
    pub fn sample_noise(&self, rng: &mut impl Rng) -> Vec<f64> {
        let n = self.len();
        let mut x = Vec::with_capacity(n);
        let mut phi: Vec<f64> = Vec::with_capacity(n);
        let mut next: Vec<f64> = Vec::with_capacity(n);
        x.push(self.innovation_sd[0] * normal(rng));
        for m in 1..n {
            let r = self.reflection[m];
            next.clear();
            next.extend((0..phi.len()).map(|j| phi[j] - r * phi[phi.len() - 1 - j]));
            next.push(r);
            std::mem::swap(&mut phi, &mut next);
            // phi[j] multiplies x[m - 1 - j]
            let mean: f64 = phi.iter().zip(x.iter().rev()).map(|(c, v)| c * v).sum();
            x.push(mean + self.innovation_sd[m] * normal(rng));
        }
        x
    }
}

type SynthesizerCache = Mutex<HashMap<(usize, u64), Arc<FbmSynthesizer>>>;

fn synthesizer_cache() -> &'static SynthesizerCache {
    static CACHE: OnceLock<SynthesizerCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared generator for `increments` steps at Hurst exponent `hurst`.
pub fn cached_synthesizer(increments: usize, hurst: f64) -> Result<Arc<FbmSynthesizer>> {
    let key = (increments, hurst.to_bits());
    if let Some(s) = synthesizer_cache().lock().unwrap().get(&key) {
        return Ok(Arc::clone(s));
    }
    let built = Arc::new(FbmSynthesizer::new(increments, hurst)?);
    let mut cache = synthesizer_cache().lock().unwrap();
    Ok(Arc::clone(cache.entry(key).or_insert(built)))
}

/// Covariance `(s^2H + t^2H - |t - s|^2H) / 2` of fractional Brownian motion.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    0.5 * (s.abs().powf(two_h) + t.abs().powf(two_h) - (t - s).abs().powf(two_h))
}

/// Covariance `s^(1-p) t^p / (1 - 2p)` (for `s <= t`) of noise-reinforced BM.
pub fn nrbm_covariance(s: f64, t: f64, p: f64) -> f64 {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if s == 0.0 {
        return 0.0;
    }
    s.powf(1.0 - p) * t.powf(p) / (1.0 - 2.0 * p)
}

/// Fractional Brownian motion on a uniform mesh, exact in law.
pub fn sample_fbm(mesh: &Mesh, hurst: f64, seed: u64) -> Result<DrivingPath> {
    check_hurst(hurst)?;
    let h = mesh.uniform_step()?;
    let synth = cached_synthesizer(mesh.steps(), hurst)?;
    let noise = synth.sample_noise(&mut path_stream(seed));
    let scale = h.powf(hurst);
    let mut values = Vec::with_capacity(mesh.len());
    values.push(0.0);
    for (k, g) in noise.iter().enumerate() {
        let prev = values[k];
        values.push(prev + scale * g);
    }
    Ok(DrivingPath {
        mesh: mesh.clone(),
        values,
        kind: DrivingKind::Fractional { hurst },
        seed,
        scaling: Scaling::Raw,
    })
}

/// Noise-reinforced BM via the time change
/// `B^p_t = (1 - 2p)^(-1/2) t^p W(t^(1-2p))`, exact in law.
///
/// For `p = 0` the output is bit-identical to [`sample_bm`] with the same seed.
pub fn sample_nrbm_exact(mesh: &Mesh, p: f64, seed: u64) -> Result<DrivingPath> {
    check_reinforcement(p)?;
    let times = mesh.times();
    let warp = 1.0 - 2.0 * p;
    let warped: Vec<f64> = times.iter().map(|&t| t.powf(warp)).collect();
    if warped.iter().any(|w| !w.is_finite()) {
        return Err(Error::validation(
            "time warp t^(1-2p) overflows on this horizon",
        ));
    }
    let w = brownian_at(&warped, &mut path_stream(seed));
    let c = 1.0 / warp.sqrt();
    let values = times
        .iter()
        .zip(&w)
        .map(|(&t, &b)| if t == 0.0 { 0.0 } else { c * t.powf(p) * b })
        .collect();
    Ok(DrivingPath {
        mesh: mesh.clone(),
        values,
        kind: DrivingKind::NoiseReinforced { p },
        seed,
        scaling: Scaling::Raw,
    })
}

/// Noise-reinforced BM by Euler–Maruyama on `dX = (p/t) X dt + dB`.
///
/// The drift is singular at `t = 0`, so the first grid value is drawn from
/// the exact marginal `N(0, t_1 / (1 - 2p))`; later steps use Euler. The
/// standard normals are consumed in the same order as by
/// [`sample_nrbm_exact`], so equal seeds give strongly coupled paths.
pub fn sample_nrbm_sde(mesh: &Mesh, p: f64, seed: u64) -> Result<DrivingPath> {
    check_reinforcement(p)?;
    let times = mesh.times();
    let mut rng = path_stream(seed);
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    if times.len() > 1 {
        values.push((times[1] / (1.0 - 2.0 * p)).sqrt() * normal(&mut rng));
    }
    for k in 1..times.len().saturating_sub(1) {
        let h = times[k + 1] - times[k];
        let x = values[k];
        values.push(x + p * x / times[k] * h + h.sqrt() * normal(&mut rng));
    }
    Ok(DrivingPath {
        mesh: mesh.clone(),
        values,
        kind: DrivingKind::NoiseReinforced { p },
        seed,
        scaling: Scaling::Raw,
    })
}

/// `p`-th power interpolation with `factor` sub-points per cell.
///
/// On `[t_k, t_k + h]` the interpolant is
/// `((t - t_k)/h)^exponent * (v_{k+1} - v_k) + v_k`; mesh points are
/// reproduced exactly and `exponent = 1` is linear interpolation.
pub fn power_interpolate(path: &DrivingPath, exponent: f64, factor: usize) -> Result<DrivingPath> {
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::validation("interpolation exponent must be > 0"));
    }
    if factor == 0 {
        return Err(Error::validation("refinement factor must be >= 1"));
    }
    path.mesh.uniform_step()?;
    if factor == 1 {
        return Ok(path.clone());
    }
    let old_t = path.mesh.times();
    let n = old_t.len() - 1;
    let r = factor as f64;
    let weights: Vec<f64> = (0..factor).map(|j| (j as f64 / r).powf(exponent)).collect();
    let mut times = Vec::with_capacity(n * factor + 1);
    let mut values = Vec::with_capacity(n * factor + 1);
    for k in 0..n {
        let (t0, t1) = (old_t[k], old_t[k + 1]);
        let (v0, v1) = (path.values[k], path.values[k + 1]);
        times.push(t0);
        values.push(v0);
        for (j, w) in weights.iter().enumerate().skip(1) {
            times.push(t0 + (t1 - t0) * (j as f64 / r));
            values.push(w * (v1 - v0) + v0);
        }
    }
    times.push(old_t[n]);
    values.push(path.values[n]);
    Ok(DrivingPath {
        mesh: Mesh::new(times)?,
        values,
        ..path.clone()
    })
}
