//! Ninomiya–Victoir splitting for the reverse Loewner flow.
//!
//! One step maps `Z_k` to `Z_{k+1}` by running the drift flow of `L0` for
//! `h/2`, translating by the driving increment (the flow of the constant field
//! `L1`), and running the drift flow for another `h/2`. For `L0(z) = -2/z` the
//! drift flow is closed form, `z -> sqrt_h(z^2 - 2h)` per half-step, so
//!
//! ```text
//! Z_{k+1}^2 + 2h = (sqrt_h(Z_k^2 - 2h) + sqrt(kappa) dB_k)^2
//! ```
//!
//! holds exactly. The fractional variant replaces `L0` by
//! `|z|^(2 - 1/H) (-2/z)`, whose flow is integrated numerically.

use serde::{Deserialize, Serialize};

use crate::driving::{check_hurst, DrivingKind, DrivingPath, DrivingSpec, Mesh};
use crate::halfplane::sqrt_h;
use crate::{ComplexPoint, Error, Result};

/// Highest fidelity index accepted in theory mode; beyond it the cubic step
/// count is unusable.
pub const MAX_THEORY_FIDELITY: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// `y0 = N^(-1/2)` and `M = ceil(T (4N + 1)^3)`.
    Theory,
    /// `y0` and `M` chosen by the caller.
    Practical,
}

/// Initial height, step count and horizon of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelitySchedule {
    pub mode: ScheduleMode,
    /// Fidelity index `N` (theory mode only).
    pub fidelity: Option<u64>,
    pub steps: usize,
    pub y0: f64,
    pub horizon: f64,
}

impl FidelitySchedule {
    pub fn theory(fidelity: u64, horizon: f64) -> Result<Self> {
        if fidelity == 0 || fidelity > MAX_THEORY_FIDELITY {
            return Err(Error::validation(format!(
                "fidelity N must lie in 1..={MAX_THEORY_FIDELITY}"
            )));
        }
        check_horizon(horizon)?;
        let cells = (4 * fidelity + 1).pow(3) as f64;
        let steps = (horizon * cells).ceil() as usize;
        Ok(FidelitySchedule {
            mode: ScheduleMode::Theory,
            fidelity: Some(fidelity),
            steps: steps.max(1),
            y0: 1.0 / (fidelity as f64).sqrt(),
            horizon,
        })
    }

    pub fn practical(steps: usize, y0: f64, horizon: f64) -> Result<Self> {
        let s = FidelitySchedule {
            mode: ScheduleMode::Practical,
            fidelity: None,
            steps,
            y0,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::validation("step count M must be >= 1"));
        }
        if !(self.y0 > 0.0 && self.y0.is_finite()) {
            return Err(Error::validation("initial height y0 must be > 0"));
        }
        check_horizon(self.horizon)
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::uniform(self.horizon, self.steps)
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn start(&self) -> ComplexPoint {
        ComplexPoint::new(0.0, self.y0)
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("horizon T must be > 0"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Sle,
    Nrsle,
    Fsle,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Sle => "sle",
            Variant::Nrsle => "nrsle",
            Variant::Fsle => "fsle",
        }
    }
}

/// Where a trace came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TraceOrigin {
    Splitting {
        variant: Variant,
        spec: DrivingSpec,
        schedule: FidelitySchedule,
    },
    Oracle {
        name: String,
    },
    External,
}

/// Time-stamped polyline of flow states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub points: Vec<ComplexPoint>,
    pub origin: TraceOrigin,
}

impl Trace {
    pub fn new(times: Vec<f64>, points: Vec<ComplexPoint>, origin: TraceOrigin) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::validation("trace times and points differ in length"));
        }
        if times.is_empty() {
            return Err(Error::validation("empty trace"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("trace times must be strictly increasing"));
        }
        Ok(Trace {
            times,
            points,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last(&self) -> ComplexPoint {
        *self.points.last().unwrap()
    }

    /// Translate every point by a real amount, e.g. the realised
    /// `sqrt(kappa) B_T` to place the trace in the forward-curve frame.
    pub fn shifted(&self, by: f64) -> Trace {
        Trace {
            points: self.points.iter().map(|z| z + by).collect(),
            ..self.clone()
        }
    }

    /// Every `stride`-th point (always keeping the last).
    pub fn subsample(&self, stride: usize) -> Trace {
        let stride = stride.max(1);
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if *idx.last().unwrap() != self.len() - 1 {
            idx.push(self.len() - 1);
        }
        Trace {
            times: idx.iter().map(|&i| self.times[i]).collect(),
            points: idx.iter().map(|&i| self.points[i]).collect(),
            origin: self.origin.clone(),
        }
    }
}

/// A drift flow: the exact (or numerically integrated) solution map of the
/// drift vector field `L0` over a given duration.
pub trait DriftFlow {
    fn advance(&self, z: ComplexPoint, duration: f64) -> std::result::Result<ComplexPoint, f64>;
}

/// `L0(z) = -2/z`; its flow is `z -> sqrt_h(z^2 - 4t)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoewnerDrift;

impl DriftFlow for LoewnerDrift {
    #[inline]
    fn advance(&self, z: ComplexPoint, duration: f64) -> std::result::Result<ComplexPoint, f64> {
        Ok(sqrt_h(z * z - 4.0 * duration))
    }
}

/// Singularity floor on `|z|` for the fractional drift.
pub const FRACTIONAL_FLOOR: f64 = 1e-8;
/// Largest relative change of `z` allowed in one integrator substep.
pub const FRACTIONAL_MAX_REL_CHANGE: f64 = 1e-2;

/// Integrator settings of the fractional drift flow, as recorded in metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstepPolicy {
    pub method: String,
    pub max_relative_change: f64,
    pub modulus_floor: f64,
}

impl Default for SubstepPolicy {
    fn default() -> Self {
        SubstepPolicy {
            method: "rk4 on w = z^2, adaptive substeps".into(),
            max_relative_change: FRACTIONAL_MAX_REL_CHANGE,
            modulus_floor: FRACTIONAL_FLOOR,
        }
    }
}

/// `L0(z) = |z|^(2 - 1/H) (-2/z)`.
///
/// With `w = z^2` the flow reads `dw/dt = -4 |w|^((2 - 1/H)/2)`: a real,
/// negative velocity, so `Im w` is conserved and only `Re w` evolves. That
/// scalar equation is integrated with classical RK4, choosing each substep so
/// `|z|` changes by at most [`FRACTIONAL_MAX_REL_CHANGE`] relative. For
/// `H = 1/2` the velocity is constant and the flow is taken in one exact step.
#[derive(Clone, Copy, Debug)]
pub struct FractionalDrift {
    hurst: f64,
    power: f64,
}

impl FractionalDrift {
    pub fn new(hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        // |w|^power with power = (2 - 1/H)/2; computed on |w|^2 = u^2 + v^2
        Ok(FractionalDrift {
            hurst,
            power: (2.0 - 1.0 / hurst) / 4.0,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    #[inline]
    fn velocity(&self, u: f64, v2: f64) -> f64 {
        -4.0 * (u * u + v2).powf(self.power)
    }
}

impl DriftFlow for FractionalDrift {
    fn advance(&self, z: ComplexPoint, duration: f64) -> std::result::Result<ComplexPoint, f64> {
        if duration == 0.0 {
            return Ok(z);
        }
        let w = z * z;
        if self.power == 0.0 {
            return Ok(sqrt_h(w - 4.0 * duration));
        }
        let v2 = w.im * w.im;
        let floor_sq = FRACTIONAL_FLOOR * FRACTIONAL_FLOOR;
        let mut u = w.re;
        let mut remaining = duration;
        while remaining > 0.0 {
            let modulus = (u * u + v2).sqrt();
            if modulus < floor_sq {
                return Err(modulus.sqrt());
            }
            let speed = self.velocity(u, v2).abs();
            // |dz|/|z| = |dw| / (2|w|)
            let dt = (2.0 * FRACTIONAL_MAX_REL_CHANGE * modulus / speed).min(remaining);
            let k1 = self.velocity(u, v2);
            let k2 = self.velocity(u + 0.5 * dt * k1, v2);
            let k3 = self.velocity(u + 0.5 * dt * k2, v2);
            let k4 = self.velocity(u + dt * k3, v2);
            u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            remaining -= dt;
            if remaining < 1e-15 * duration {
                break;
            }
        }
        let out = sqrt_h(ComplexPoint::new(u, w.im));
        if out.norm() < FRACTIONAL_FLOOR {
            return Err(out.norm());
        }
        Ok(out)
    }
}

fn check_state(z: ComplexPoint, h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::validation("step size h must be > 0"));
    }
    if !(z.im > 0.0) {
        return Err(Error::validation(
            "state must lie strictly in the upper half-plane",
        ));
    }
    Ok(())
}

#[inline]
fn step_with<F: DriftFlow>(
    flow: &F,
    z: ComplexPoint,
    h: f64,
    shift: f64,
) -> std::result::Result<ComplexPoint, f64> {
    let s = flow.advance(z, 0.5 * h)?;
    flow.advance(s + shift, 0.5 * h)
}

/// One splitting step of the standard Loewner flow.
pub fn sle_step(z: ComplexPoint, h: f64, db: f64, kappa: f64) -> Result<ComplexPoint> {
    check_state(z, h)?;
    crate::driving::check_kappa(kappa)?;
    let s = sqrt_h(z * z - 2.0 * h);
    let t = s + kappa.sqrt() * db;
    Ok(sqrt_h(t * t - 2.0 * h))
}

/// Intermediate states of one standard step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub pre: ComplexPoint,
    /// State after the first drift half-step.
    pub half: ComplexPoint,
    /// Scaled increment `sqrt(kappa) dB`.
    pub increment: f64,
    pub post: ComplexPoint,
}

impl StepRecord {
    /// `|post^2 + 2h - (half + increment)^2|`, zero in exact arithmetic.
    pub fn identity_residual(&self, h: f64) -> f64 {
        let t = self.half + self.increment;
        (self.post * self.post + 2.0 * h - t * t).norm()
    }
}

pub fn sle_step_record(
    k: usize,
    z: ComplexPoint,
    h: f64,
    db: f64,
    kappa: f64,
) -> Result<StepRecord> {
    check_state(z, h)?;
    let half = sqrt_h(z * z - 2.0 * h);
    let increment = kappa.sqrt() * db;
    let t = half + increment;
    Ok(StepRecord {
        k,
        pre: z,
        half,
        increment,
        post: sqrt_h(t * t - 2.0 * h),
    })
}

/// Half-step of the fractional drift: its flow over duration `h/2`.
pub fn fsle_halfstep(z: ComplexPoint, h: f64, hurst: f64) -> Result<ComplexPoint> {
    if !(z.im > 0.0) {
        return Err(Error::validation(
            "state must lie strictly in the upper half-plane",
        ));
    }
    if !(h >= 0.0) {
        return Err(Error::validation("step size h must be >= 0"));
    }
    FractionalDrift::new(hurst)?
        .advance(z, 0.5 * h)
        .map_err(|modulus| Error::Singularity { step: 0, modulus })
}

/// States along the splitting recursion driven by the increments of `force`
/// (an already scaled driving path), starting from `z0`.
pub fn split_states<F: DriftFlow>(
    z0: ComplexPoint,
    force: &DrivingPath,
    flow: &F,
) -> Result<Vec<ComplexPoint>> {
    let times = force.times();
    let mut out = Vec::with_capacity(times.len());
    out.push(z0);
    let mut z = z0;
    for k in 0..times.len() - 1 {
        let h = times[k + 1] - times[k];
        let shift = force.values[k + 1] - force.values[k];
        z = step_with(flow, z, h, shift)
            .map_err(|modulus| Error::Singularity { step: k, modulus })?;
        out.push(z);
    }
    Ok(out)
}

fn variant_of(kind: &DrivingKind) -> Variant {
    match kind {
        DrivingKind::StandardBm => Variant::Sle,
        DrivingKind::NoiseReinforced { .. } => Variant::Nrsle,
        DrivingKind::Fractional { .. } => Variant::Fsle,
    }
}

/// Runs the scheme for any driving kind, also returning the raw driving path.
pub fn simulate_with_driving(
    spec: &DrivingSpec,
    schedule: &FidelitySchedule,
) -> Result<(Trace, DrivingPath)> {
    spec.validate()?;
    schedule.validate()?;
    let mesh = schedule.mesh()?;
    let raw = spec.sample(&mesh)?;
    let force = raw.to_force(spec.kappa)?;
    let points = match spec.kind {
        DrivingKind::Fractional { hurst } => {
            split_states(schedule.start(), &force, &FractionalDrift::new(hurst)?)?
        }
        _ => split_states(schedule.start(), &force, &LoewnerDrift)?,
    };
    let trace = Trace {
        times: mesh.times().to_vec(),
        points,
        origin: TraceOrigin::Splitting {
            variant: variant_of(&spec.kind),
            spec: *spec,
            schedule: *schedule,
        },
    };
    Ok((trace, raw))
}

pub fn simulate(spec: &DrivingSpec, schedule: &FidelitySchedule) -> Result<Trace> {
    simulate_with_driving(spec, schedule).map(|(t, _)| t)
}

/// Standard SLE: Brownian driving, drift `-2/z`.
pub fn simulate_sle(spec: &DrivingSpec, schedule: &FidelitySchedule) -> Result<Trace> {
    if spec.kind != DrivingKind::StandardBm {
        return Err(Error::validation(
            "simulate_sle needs a standard Brownian driver",
        ));
    }
    simulate(spec, schedule)
}

/// Noise-reinforced SLE: the time-homogeneous drift `-2/z` is kept and the
/// translation uses increments of the reinforced process.
pub fn simulate_nrsle(spec: &DrivingSpec, schedule: &FidelitySchedule) -> Result<Trace> {
    if !matches!(spec.kind, DrivingKind::NoiseReinforced { .. }) {
        return Err(Error::validation(
            "simulate_nrsle needs a noise-reinforced driver",
        ));
    }
    simulate(spec, schedule)
}

/// Fractional SLE: drift `|z|^(2-1/H)(-2/z)`, translation by `kappa^H dB^H`.
pub fn simulate_fsle(spec: &DrivingSpec, schedule: &FidelitySchedule) -> Result<Trace> {
    if !matches!(spec.kind, DrivingKind::Fractional { .. }) {
        return Err(Error::validation("simulate_fsle needs a fractional driver"));
    }
    simulate(spec, schedule)
}

/// Continuous-in-step evaluation of one standard step.
///
/// Given the state `start` at `t_k`, the step length `h` and the scaled
/// increment over the whole step, [`StepInterpolant::stages`] returns the three
/// stage processes at `t_k + s`: the first drift half-flow, the translation
/// stage (which needs the scaled increment up to `t_k + s`), and the second
/// drift half-flow. At `s = h` the last stage equals the next state.
#[derive(Clone, Copy, Debug)]
pub struct StepInterpolant {
    pub start: ComplexPoint,
    pub h: f64,
    pub increment: f64,
}

impl StepInterpolant {
    pub fn stages(&self, s: f64, partial_increment: f64) -> [ComplexPoint; 3] {
        let z2 = self.start * self.start;
        let first = sqrt_h(z2 - 2.0 * s);
        let mid = sqrt_h(z2 - 2.0 * self.h);
        let second = mid + partial_increment;
        let end_mid = mid + self.increment;
        let third = sqrt_h(end_mid * end_mid - 2.0 * s);
        [first, second, third]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn theory_schedule() {
        let s = FidelitySchedule::theory(2, 1.0).unwrap();
        assert_eq!(s.steps, 729);
        assert!((s.y0 - 1.0 / 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(FidelitySchedule::theory(1, 0.5).unwrap().steps, 63);
        assert!(FidelitySchedule::theory(0, 1.0).is_err());
    }

    #[test]
    fn practical_schedule_validation() {
        assert!(FidelitySchedule::practical(0, 0.1, 1.0).is_err());
        assert!(FidelitySchedule::practical(10, 0.0, 1.0).is_err());
        assert!(FidelitySchedule::practical(10, 0.1, -1.0).is_err());
        assert_eq!(
            FidelitySchedule::practical(8, 0.1, 2.0).unwrap().step(),
            0.25
        );
    }

    #[test]
    fn zero_noise_step_is_exact_flow() {
        let z = sle_step(c(0.0, 1.0), 0.5, 0.0, 4.0).unwrap();
        assert!((z - c(0.0, 3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn noisy_step_matches_high_precision_value() {
        // 50-digit evaluation of the same composition
        let z = sle_step(c(0.0, 1.0), 0.5, 0.5, 4.0).unwrap();
        let expect = c(0.855_599_677_167_352_2, 1.652_891_650_281_069_5);
        assert!((z - expect).norm() < 4e-16, "{z}");
    }

    #[test]
    fn deep_field_step_is_near_translation() {
        let kappa: f64 = 4.0;
        let db = 1e-3 / kappa.sqrt();
        let z = sle_step(c(0.0, 1e4), 1e-6, db, kappa).unwrap();
        assert!(z.re.is_finite() && z.im.is_finite());
        assert!((z - c(1e-3, 1e4)).norm() <= 1e-6);
    }

    #[test]
    fn step_errors() {
        assert!(sle_step(c(0.0, 1.0), 0.0, 0.0, 1.0).is_err());
        assert!(sle_step(c(0.0, 0.0), 0.1, 0.0, 1.0).is_err());
        assert!(sle_step(c(0.0, -1.0), 0.1, 0.0, 1.0).is_err());
        assert!(sle_step(c(0.0, 1.0), 0.1, 0.0, -1.0).is_err());
    }

    #[test]
    fn step_record_identity() {
        let r = sle_step_record(3, c(0.3, 0.8), 0.01, 0.2, 3.0).unwrap();
        assert!(r.identity_residual(0.01) < 1e-15);
        assert_eq!(r.post, sle_step(c(0.3, 0.8), 0.01, 0.2, 3.0).unwrap());
    }

    #[test]
    fn fractional_halfstep_reduces_to_closed_form() {
        let z = fsle_halfstep(c(0.0, 1.0), 0.5, 0.5).unwrap();
        assert!((z - c(0.0, 2f64.sqrt())).norm() < 1e-10);
        let w = c(0.4, 0.3);
        assert_eq!(fsle_halfstep(w, 0.0, 0.8).unwrap(), w);
        assert!(fsle_halfstep(c(0.0, 1.0), 0.1, 1.0).is_err());
    }

    #[test]
    fn fractional_halfstep_keeps_im_w() {
        let z = c(0.3, 0.5);
        let out = fsle_halfstep(z, 0.2, 0.7).unwrap();
        assert!(((out * out).im - (z * z).im).abs() < 1e-15);
        assert!(out.im > z.im);
    }

    #[test]
    fn fractional_step_with_half_hurst_matches_standard_step() {
        let flow = FractionalDrift::new(0.5).unwrap();
        let z = c(0.2, 0.7);
        let a = step_with(&flow, z, 0.01, 2.0 * 0.3).unwrap();
        let b = sle_step(z, 0.01, 0.3, 4.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kappa_zero_trace_is_vertical_ray() {
        let spec = DrivingSpec::new(DrivingKind::StandardBm, 0.0, 1).unwrap();
        let sched = FidelitySchedule::practical(1000, 0.1, 1.0).unwrap();
        let tr = simulate_sle(&spec, &sched).unwrap();
        for (t, z) in tr.times.iter().zip(&tr.points) {
            let exact = c(0.0, (0.01 + 4.0 * t).sqrt());
            assert!((z - exact).norm() <= 1e-12 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn variant_entry_points_check_kind() {
        let sched = FidelitySchedule::practical(16, 0.1, 1.0).unwrap();
        let bm = DrivingSpec::new(DrivingKind::StandardBm, 2.0, 1).unwrap();
        let fr = DrivingSpec::new(DrivingKind::Fractional { hurst: 0.6 }, 2.0, 1).unwrap();
        assert!(simulate_fsle(&bm, &sched).is_err());
        assert!(simulate_nrsle(&bm, &sched).is_err());
        assert!(simulate_sle(&fr, &sched).is_err());
        assert!(simulate_fsle(&fr, &sched).is_ok());
    }

    #[test]
    fn interpolant_stages_hit_mesh_states() {
        let z = c(0.1, 0.9);
        let (h, inc) = (0.02, 0.15);
        let ip = StepInterpolant {
            start: z,
            h,
            increment: inc,
        };
        let [a, b, cc] = ip.stages(0.0, 0.0);
        assert!((a - z).norm() < 1e-15);
        assert!((b - sqrt_h(z * z - 2.0 * h)).norm() < 1e-15);
        assert!((cc - b).norm() > 0.0 || inc == 0.0);
        let [_, _, end] = ip.stages(h, inc);
        assert_eq!(end, sle_step(z, h, inc, 1.0).unwrap());
    }

    #[test]
    fn trace_helpers() {
        let t = Trace::new(
            vec![0.0, 0.5, 1.0],
            vec![c(0.0, 1.0), c(0.5, 1.5), c(1.0, 2.0)],
            TraceOrigin::External,
        )
        .unwrap();
        assert_eq!(t.shifted(1.0).points[0], c(1.0, 1.0));
        let s = t.subsample(2);
        assert_eq!(s.times, vec![0.0, 1.0]);
        assert!(Trace::new(vec![0.0, 0.0], vec![c(0.0, 1.0); 2], TraceOrigin::External).is_err());
    }
}
