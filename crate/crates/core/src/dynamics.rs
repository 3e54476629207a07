//! Controlled dephasing dynamics of the Bloch vector.
//!
//! The equations of motion under a control field `(ux, uy, uz)` are
//!
//! ```text
//! 2 v̇x = −γ vx + uy vz − uz vy
//! 2 v̇y = −γ vy − ux vz + uz vx
//! 2 v̇z =  ux vy − uy vx
//! ```
//!
//! Two independent routes evaluate them: a closed-form propagator for
//! piecewise-constant transverse fields ([`simulate`], [`state_at`]) and a
//! fixed-step classical Runge-Kutta integrator used as an oracle
//! ([`integrate_rk4`]).
//!
//! Schedules have three stages: rotate towards the z axis, wait there with
//! the field off, rotate back with the field reversed. Stage 3 starts at
//! `dt1 + dt2`. Stage intervals are half-open `[start, end)`, except the last
//! non-empty one, which is closed at the horizon.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::bloch::{coherence, purity, BlochState};
use crate::error::{Error, Result};

/// Rotation sense of the stage-1 field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value() as i8)
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match i64::deserialize(deserializer)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "epsilon must be +1 or -1, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlField {
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
}

impl ControlField {
    pub const ZERO: ControlField = ControlField {
        ux: 0.0,
        uy: 0.0,
        uz: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Field on: steer the state onto the z axis.
    Approach,
    /// Field off: the state sits in the decoherence-free subset.
    Hold,
    /// Field reversed: steer back out to the initial coherence.
    Return,
}

/// Three-stage piecewise-constant transverse control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlSchedule {
    epsilon: Sign,
    theta: f64,
    u: f64,
    dt1: f64,
    dt2: f64,
    dt3: f64,
}

impl ControlSchedule {
    pub fn new(epsilon: Sign, theta: f64, u: f64, dt1: f64, dt2: f64, dt3: f64) -> Result<Self> {
        if !(theta.is_finite() && (0.0..TAU).contains(&theta)) {
            return Err(Error::InvalidSchedule(format!(
                "theta must lie in [0, 2π), got {theta}"
            )));
        }
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::InvalidSchedule(format!("u must be > 0, got {u}")));
        }
        for (name, dt) in [("dt1", dt1), ("dt2", dt2), ("dt3", dt3)] {
            if !(dt.is_finite() && dt >= 0.0) {
                return Err(Error::InvalidSchedule(format!("{name} must be >= 0, got {dt}")));
            }
        }
        Ok(Self {
            epsilon,
            theta,
            u,
            dt1,
            dt2,
            dt3,
        })
    }

    pub fn epsilon(&self) -> Sign {
        self.epsilon
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn dt1(&self) -> f64 {
        self.dt1
    }

    pub fn dt2(&self) -> f64 {
        self.dt2
    }

    pub fn dt3(&self) -> f64 {
        self.dt3
    }

    pub fn horizon(&self) -> f64 {
        self.dt1 + self.dt2 + self.dt3
    }

    /// Switching instants `dt1` and `dt1 + dt2`.
    pub fn switch_times(&self) -> [f64; 2] {
        [self.dt1, self.dt1 + self.dt2]
    }

    fn stages(&self) -> [(Stage, f64, f64); 3] {
        let [s1, s2] = self.switch_times();
        [
            (Stage::Approach, 0.0, s1),
            (Stage::Hold, s1, s2),
            (Stage::Return, s2, self.horizon()),
        ]
    }

    /// Stage active at `t`, with half-open intervals and the last non-empty
    /// stage closed at the horizon.
    pub fn stage_at(&self, t: f64) -> Result<Stage> {
        let horizon = self.horizon();
        if !(t >= 0.0 && t <= horizon) {
            return Err(Error::OutOfHorizon { t, horizon });
        }
        let stages = self.stages();
        if let Some(&(stage, _, _)) = stages.iter().find(|(_, start, end)| *start <= t && t < *end) {
            return Ok(stage);
        }
        // t == horizon
        Ok(stages
            .iter()
            .rev()
            .find(|(_, start, end)| end > start)
            .map(|(stage, _, _)| *stage)
            .unwrap_or(Stage::Hold))
    }

    fn field_in(&self, stage: Stage) -> ControlField {
        let amplitude = match stage {
            Stage::Approach => self.epsilon.value() * self.u,
            Stage::Hold => return ControlField::ZERO,
            Stage::Return => -self.epsilon.value() * self.u,
        };
        let (s, c) = self.theta.sin_cos();
        ControlField {
            ux: -amplitude * s,
            uy: amplitude * c,
            uz: 0.0,
        }
    }
}

impl<'de> Deserialize<'de> for ControlSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            epsilon: Sign,
            theta: f64,
            u: f64,
            dt1: f64,
            dt2: f64,
            dt3: f64,
        }
        let r = Raw::deserialize(deserializer)?;
        ControlSchedule::new(r.epsilon, r.theta, r.u, r.dt1, r.dt2, r.dt3).map_err(serde::de::Error::custom)
    }
}

/// Field applied by `schedule` at time `t`.
pub fn control_field_at(schedule: &ControlSchedule, t: f64) -> Result<ControlField> {
    Ok(schedule.field_in(schedule.stage_at(t)?))
}

/// Time derivative of the Bloch vector.
pub fn derivative(state: &BlochState, field: &ControlField, gamma: f64) -> [f64; 3] {
    let [vx, vy, vz] = state.components();
    derivative_raw([vx, vy, vz], field, gamma)
}

fn derivative_raw(v: [f64; 3], f: &ControlField, gamma: f64) -> [f64; 3] {
    let [vx, vy, vz] = v;
    [
        0.5 * (-gamma * vx + f.uy * vz - f.uz * vy),
        0.5 * (-gamma * vy - f.ux * vz + f.uz * vx),
        0.5 * (f.ux * vy - f.uy * vx),
    ]
}

/// Field-free evolution over `dt >= 0`.
pub fn free_propagate(state: &BlochState, gamma: f64, dt: f64) -> BlochState {
    debug_assert!(dt >= 0.0);
    let decay = (-0.5 * gamma * dt).exp();
    BlochState::from_components(state.vx() * decay, state.vy() * decay, state.vz())
}

/// `√(4u² − γ²)`, factored for accuracy near `u = γ/2`.
pub(crate) fn oscillation_width(u: f64, gamma: f64) -> f64 {
    ((2.0 * u - gamma) * (2.0 * u + gamma)).sqrt()
}

pub(crate) fn check_oscillatory(u: f64, gamma: f64) -> Result<()> {
    if !(u > 0.5 * gamma) {
        return Err(Error::OverdampedRegime {
            u,
            half_gamma: 0.5 * gamma,
        });
    }
    Ok(())
}

/// Exact xz-plane solution under `uy = signed_u`, `ux = uz = 0`.
fn evolve_xz(vx: f64, vz: f64, signed_u: f64, gamma: f64, dt: f64) -> (f64, f64) {
    let w = oscillation_width(signed_u.abs(), gamma);
    let decay = (-0.25 * gamma * dt).exp();
    let (s, c) = (0.25 * w * dt).sin_cos();
    (
        decay * (vx * c + (2.0 * signed_u * vz - gamma * vx) / w * s),
        decay * (vz * c - (2.0 * signed_u * vx - gamma * vz) / w * s),
    )
}

/// Evolution of an xz-plane state under the constant field `uy = ε u` for
/// `dt`, valid in the oscillatory regime `u > γ/2`.
pub fn propagate_constant_y(
    state: &BlochState,
    u: f64,
    epsilon: Sign,
    gamma: f64,
    dt: f64,
) -> Result<BlochState> {
    check_oscillatory(u, gamma)?;
    if state.vy() != 0.0 {
        return Err(Error::PlaneViolation { vy: state.vy() });
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidStep(dt));
    }
    let (vx, vz) = evolve_xz(state.vx(), state.vz(), epsilon.value() * u, gamma, dt);
    Ok(BlochState::from_components(vx, 0.0, vz))
}

/// Evolution within one stage for `elapsed` time. Driven stages are solved in
/// the frame rotated by `−θ`, where the field lies along y and `vy` decouples.
fn evolve_in_stage(
    state: &BlochState,
    schedule: &ControlSchedule,
    stage: Stage,
    gamma: f64,
    elapsed: f64,
) -> BlochState {
    let signed_u = match stage {
        Stage::Hold => return free_propagate(state, gamma, elapsed),
        Stage::Approach => schedule.epsilon.value() * schedule.u,
        Stage::Return => -schedule.epsilon.value() * schedule.u,
    };
    let theta = schedule.theta;
    let local = state.rotate_z(-theta);
    let (vx, vz) = evolve_xz(local.vx(), local.vz(), signed_u, gamma, elapsed);
    let vy = local.vy() * (-0.5 * gamma * elapsed).exp();
    BlochState::from_components(vx, vy, vz).rotate_z(theta)
}

/// States at the start of each stage plus the final state.
fn stage_entry_states(
    schedule: &ControlSchedule,
    state0: &BlochState,
    gamma: f64,
) -> Result<[BlochState; 4]> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParams(format!("gamma must be > 0, got {gamma}")));
    }
    let mut entries = [*state0; 4];
    for (k, (stage, start, end)) in schedule.stages().into_iter().enumerate() {
        let duration = end - start;
        entries[k + 1] = if duration > 0.0 {
            if stage != Stage::Hold {
                check_oscillatory(schedule.u, gamma)?;
            }
            evolve_in_stage(&entries[k], schedule, stage, gamma, duration)
        } else {
            entries[k]
        };
    }
    Ok(entries)
}

fn state_from_entries(
    schedule: &ControlSchedule,
    entries: &[BlochState; 4],
    gamma: f64,
    t: f64,
) -> Result<BlochState> {
    let stage = schedule.stage_at(t)?;
    let (index, start) = match stage {
        Stage::Approach => (0, 0.0),
        Stage::Hold => (1, schedule.dt1),
        Stage::Return => (2, schedule.dt1 + schedule.dt2),
    };
    Ok(evolve_in_stage(
        &entries[index],
        schedule,
        stage,
        gamma,
        t - start,
    ))
}

/// Closed-form state at time `t` of the controlled evolution from `state0`.
pub fn state_at(schedule: &ControlSchedule, state0: &BlochState, gamma: f64, t: f64) -> Result<BlochState> {
    let entries = stage_entry_states(schedule, state0, gamma)?;
    state_from_entries(schedule, &entries, gamma, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: BlochState,
    pub field: ControlField,
    pub purity: f64,
    pub coherence: f64,
}

/// Time-ordered samples of a controlled evolution.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    fn push(&mut self, t: f64, state: BlochState, field: ControlField) {
        debug_assert!(self.samples.last().is_none_or(|s| s.t < t));
        self.samples.push(Sample {
            t,
            state,
            field,
            purity: purity(&state),
            coherence: coherence(&state),
        });
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    pub fn min_coherence(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.coherence)
            .fold(f64::INFINITY, f64::min)
    }
}

impl<'a> IntoIterator for &'a Trajectory {
    type Item = &'a Sample;
    type IntoIter = std::slice::Iter<'a, Sample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidStep(step));
    }
    Ok(())
}

/// Sample times `k·step` below `t_end` merged with the given breakpoints and
/// `t_end` itself, strictly increasing. Grid points closer than
/// `MERGE_FRACTION · step` to a breakpoint or to `t_end` are dropped in favour
/// of the exact instant.
fn sample_times(t_start: f64, t_end: f64, step: f64, breakpoints: &[f64]) -> Vec<f64> {
    const MERGE_FRACTION: f64 = 1e-6;
    let mut exact: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t_start && b < t_end)
        .collect();
    exact.push(t_end);
    let near_exact = |t: f64| exact.iter().any(|&b| (b - t).abs() < MERGE_FRACTION * step);
    let mut times: Vec<f64> = (0..)
        .map(|k| t_start + k as f64 * step)
        .take_while(|&t| t < t_end)
        .filter(|&t| t == t_start || !near_exact(t))
        .collect();
    times.extend(exact);
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Closed-form trajectory of `schedule` applied to `state0`, sampled every
/// `sample_step` and at each switching instant.
pub fn simulate(
    schedule: &ControlSchedule,
    state0: &BlochState,
    gamma: f64,
    sample_step: f64,
) -> Result<Trajectory> {
    check_step(sample_step)?;
    let entries = stage_entry_states(schedule, state0, gamma)?;
    let mut trajectory = Trajectory::default();
    for t in sample_times(0.0, schedule.horizon(), sample_step, &schedule.switch_times()) {
        let state = state_from_entries(schedule, &entries, gamma, t)?;
        trajectory.push(t, state, control_field_at(schedule, t)?);
    }
    Ok(trajectory)
}

fn rk4_step(v: [f64; 3], field: &ControlField, gamma: f64, h: f64) -> [f64; 3] {
    let shift = |v: [f64; 3], k: [f64; 3], a: f64| [v[0] + a * k[0], v[1] + a * k[1], v[2] + a * k[2]];
    let k1 = derivative_raw(v, field, gamma);
    let k2 = derivative_raw(shift(v, k1, 0.5 * h), field, gamma);
    let k3 = derivative_raw(shift(v, k2, 0.5 * h), field, gamma);
    let k4 = derivative_raw(shift(v, k3, h), field, gamma);
    std::array::from_fn(|i| v[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Classical fixed-step RK4 integration of the equations of motion from `t0`
/// to `t1`. Steps never straddle a switching instant; the last step of each
/// segment is shortened to land on the segment end.
pub fn integrate_rk4(
    state: &BlochState,
    schedule: &ControlSchedule,
    gamma: f64,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Trajectory> {
    check_step(step)?;
    let horizon = schedule.horizon();
    for t in [t0, t1] {
        if !(t >= 0.0 && t <= horizon) {
            return Err(Error::OutOfHorizon { t, horizon });
        }
    }
    if !(t0 < t1) {
        return Err(Error::OutOfHorizon { t: t1, horizon });
    }

    let mut segment_ends: Vec<f64> = schedule
        .switch_times()
        .into_iter()
        .filter(|&b| b > t0 && b < t1)
        .collect();
    segment_ends.push(t1);

    let mut trajectory = Trajectory::default();
    trajectory.push(t0, *state, control_field_at(schedule, t0)?);
    let mut v = state.components();
    let mut seg_start = t0;
    for seg_end in segment_ends {
        if seg_end <= seg_start {
            continue;
        }
        let field = control_field_at(schedule, 0.5 * (seg_start + seg_end))?;
        let mut t = seg_start;
        for t_next in sample_times(seg_start, seg_end, step, &[]).into_iter().skip(1) {
            v = rk4_step(v, &field, gamma, t_next - t);
            t = t_next;
            let s = BlochState::from_components(v[0], v[1], v[2]);
            trajectory.push(t, s, control_field_at(schedule, t)?);
        }
        seg_start = seg_end;
    }
    Ok(trajectory)
}
