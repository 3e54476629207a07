//! Limit time and limit field.
//!
//! The limit time `T̃` is the longest schedule without a hold stage that still
//! returns the initial coherence; it is reached when the purity has been
//! spent entirely, i.e. `vz(T̃) = 0`. The matching field magnitude is the
//! limit field `ũ`. Stage 1 is the same as in synthesis; stage 3 runs until
//! `vz` vanishes, which happens at `tan(Ω dt3) = −√(4u²−γ²)/γ` with
//! `Ω dt3 ∈ (π/2, π)`. What remains is a single equation in `u`: the
//! transverse component at that instant must equal `√c`.
//!
//! [`u_upper_bound`] returns the closed-form over-estimate `ξ` of `ũ`
//! obtained by replacing `dt3` with half the breakdown time.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::bloch::{coherence, purity, BlochState, ModelParams};
use crate::dynamics::{oscillation_width, state_at, ControlSchedule};
use crate::error::{Error, Result};
use crate::root::bisect;
use crate::synthesis::{dt1_exact, epsilon_sign, phase_theta, system_residuals, SynthesisProblem};

const MAX_DOUBLINGS: usize = 60;
const SCAN_POINTS: usize = 256;
const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSolution {
    pub u_tilde: f64,
    pub dt1_tilde: f64,
    pub dt3_tilde: f64,
    pub t_tilde: f64,
    /// Residuals of the stage-1 equation, the stage-3 coherence equation and
    /// the `vz = 0` condition.
    pub residuals: [f64; 3],
    /// Sign changes of the outer residual seen while bracketing; more than
    /// one means the system has several solutions and the smallest field was
    /// returned.
    pub sign_changes: usize,
    /// The limit schedule (no hold stage), ready to simulate.
    pub schedule: ControlSchedule,
    /// `vz(T̃)` from forward simulation of `schedule`.
    pub final_vz: f64,
    /// `C(T̃)` from forward simulation of `schedule`.
    pub final_coherence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldBound {
    pub xi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitRegime {
    /// `T ≥ T̃`: the limit field suffices.
    Relaxed,
    /// `T < T̃`: a field stronger than `ũ` is required.
    Tight,
}

/// Stage-3 duration at which `vz` returns to zero, first branch.
fn zero_vz_dt3(u: f64, gamma: f64) -> f64 {
    let w = oscillation_width(u, gamma);
    (PI - (w / gamma).atan()) / (0.25 * w)
}

/// Transverse amplitude when `vz` vanishes, minus `√c`.
fn outer_residual(u: f64, gamma: f64, c: f64, p: f64) -> Result<f64> {
    let w = oscillation_width(u, gamma);
    let dt1 = dt1_exact(u, gamma, c, p)?;
    let dt3 = zero_vz_dt3(u, gamma);
    let amplitude = 2.0 * (u * u * p + gamma * u * c.sqrt() * (p - c).sqrt()).sqrt() / w;
    Ok((-0.25 * gamma * (dt1 + dt3)).exp() * amplitude * (0.25 * w * dt3).sin() - c.sqrt())
}

/// Solves for the limit field, the limit time and the two stage durations,
/// then replays the limit schedule to confirm `vz(T̃) = 0` and `C(T̃) = c`.
pub fn solve_limit_system(params: &ModelParams, initial: &BlochState) -> Result<LimitSolution> {
    let gamma = params.gamma;
    let (c, p) = (coherence(initial), purity(initial));
    let epsilon = epsilon_sign(initial.vz())?;
    let theta = phase_theta(initial.vx(), initial.vy())?;
    // an unrepresentable residual means the bracket cannot be formed
    let g = |u: f64| {
        outer_residual(u, gamma, c, p).map_err(|e| match e {
            Error::InvalidParams(msg) => Error::NoLimitSolution(msg),
            e => e,
        })
    };

    let lo = 0.5 * gamma * (1.0 + 1e-6);
    if g(lo)? >= 0.0 {
        return Err(Error::NoLimitSolution(format!(
            "outer residual is non-negative at u = {lo}"
        )));
    }
    let mut hi = 2.0 * lo;
    let mut doublings = 0;
    while g(hi)? <= 0.0 {
        doublings += 1;
        if doublings >= MAX_DOUBLINGS {
            return Err(Error::NoLimitSolution(format!(
                "no sign change after {MAX_DOUBLINGS} doublings"
            )));
        }
        hi *= 2.0;
    }

    // Scan the bracket for every sign change and keep the first one.
    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / SCAN_POINTS as f64)
        .collect();
    let values = grid.iter().map(|&u| g(u)).collect::<Result<Vec<f64>>>()?;
    let crossings: Vec<usize> = (0..SCAN_POINTS)
        .filter(|&k| (values[k] < 0.0) != (values[k + 1] < 0.0))
        .collect();
    let first = *crossings
        .first()
        .ok_or_else(|| Error::NoLimitSolution("bracket scan found no sign change".into()))?;

    let u_tilde = bisect(|u| g(u).unwrap_or(f64::NAN), grid[first], grid[first + 1]);
    let dt1 = dt1_exact(u_tilde, gamma, c, p)?;
    let dt3 = zero_vz_dt3(u_tilde, gamma);
    let w = oscillation_width(u_tilde, gamma);
    let [r1, r2] = system_residuals(u_tilde, gamma, c, p, dt1, dt3);
    let r3 = tangent_residual(0.25 * w * dt3, w, gamma);
    let residuals = [r1, r2, r3];
    if let Some(&worst) = residuals.iter().find(|r| !(r.abs() <= params.root_tol)) {
        return Err(Error::NoLimitSolution(format!(
            "residual {worst:e} above tolerance"
        )));
    }

    let schedule = ControlSchedule::new(epsilon, theta, u_tilde, dt1, 0.0, dt3)?;
    let end = state_at(&schedule, initial, gamma, schedule.horizon())?;
    let (final_vz, final_coherence) = (end.vz(), coherence(&end));
    if final_vz.abs() > VALIDATION_TOL || (final_coherence - c).abs() > VALIDATION_TOL {
        return Err(Error::NoLimitSolution(format!(
            "forward simulation ends at vz = {final_vz:e}, C = {final_coherence} (target {c})"
        )));
    }

    Ok(LimitSolution {
        u_tilde,
        dt1_tilde: dt1,
        dt3_tilde: dt3,
        t_tilde: dt1 + dt3,
        residuals,
        sign_changes: crossings.len(),
        schedule,
        final_vz,
        final_coherence,
    })
}

/// `tan(x) + s/γ` in the pole-free form `(γ sin x + s cos x) / hypot(γ, s)`.
fn tangent_residual(x: f64, s: f64, gamma: f64) -> f64 {
    let (sin, cos) = x.sin_cos();
    (gamma * sin + s * cos) / gamma.hypot(s)
}

/// Residual of `tan(s (p−c)/(8γc)) + s/γ = 0` in the variable
/// `s = √(4ξ² − γ²)`, normalised to stay bounded across the tangent pole.
pub fn bound_residual(gamma: f64, p: f64, c: f64, xi: f64) -> f64 {
    let s = oscillation_width(xi, gamma);
    tangent_residual(s * (p - c) / (8.0 * gamma * c), s, gamma)
}

/// Smallest `ξ > γ/2` solving `tan(√(4ξ²−γ²)(p−c)/(8γc)) = −√(4ξ²−γ²)/γ`.
///
/// In `s = √(4ξ²−γ²)` the root lies where the tangent argument is in
/// `(π/2, π)`: the tangent sweeps `(−∞, 0)` there while `−s/γ` stays negative.
pub fn u_upper_bound(gamma: f64, p: f64, c: f64) -> Result<FieldBound> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParams(format!("gamma must be > 0, got {gamma}")));
    }
    if !(c > 0.0) {
        return Err(Error::ZeroCoherence);
    }
    if !(c < p) {
        return Err(Error::NoPurityReserve);
    }
    if p > 1.0 + crate::bloch::BALL_TOLERANCE {
        return Err(Error::InvalidState(format!("purity {p} exceeds 1")));
    }
    let scale = (p - c) / (8.0 * gamma * c);
    let h = |s: f64| tangent_residual(s * scale, s, gamma);
    let (lo, hi) = (FRAC_PI_2 / scale, PI / scale);
    if !(scale.is_finite() && scale > 0.0 && h(lo) > 0.0 && h(hi) < 0.0) {
        return Err(Error::InvalidParams(format!(
            "bound equation not representable in floating point: (p − c)/(8γc) = {scale:e}"
        )));
    }
    let s = bisect(h, lo, hi);
    let xi = 0.5 * s.hypot(gamma);
    Ok(FieldBound { xi, residual: h(s) })
}

pub fn limit_regime_check(problem: &SynthesisProblem, limit: &LimitSolution) -> LimitRegime {
    if problem.horizon() >= limit.t_tilde {
        LimitRegime::Relaxed
    } else {
        LimitRegime::Tight
    }
}
