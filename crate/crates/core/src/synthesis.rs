//! Synthesis of three-stage schedules that restore the initial coherence at a
//! prescribed horizon.
//!
//! A general initial state is first rotated about z onto the special form
//! `(√c, 0, vz)`. There the field is along y and the stage durations solve
//!
//! ```text
//! tan(Ω dt1) = √(4u²−γ²) √c / (γ √c + 2u √(p−c))
//! sin(Ω dt3) = e^{γ(dt1+dt3)/4} √(4u²−γ²) √c / (2 √(u² p + γ u √c √(p−c)))
//! ```
//!
//! with `Ω = √(4u²−γ²)/4`, `dt1 + dt3 <= T` and `u > γ/2`. The first line
//! has a closed form; the second is solved by bisection on its first branch.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::bloch::{coherence, purity, BlochState, ModelParams};
use crate::dynamics::{check_oscillatory, integrate_rk4, oscillation_width, state_at, ControlSchedule, Sign};
use crate::error::{Error, Result};
use crate::root::{bisect, bisect_threshold};

/// Auto-selected fields keep `dt1 + dt3` below this fraction of the horizon,
/// so the hold stage never collapses to zero length.
pub const AUTO_U_SLACK: f64 = 0.999;

const AUTO_U_MAX_DOUBLINGS: usize = 200;
const AUTO_U_REL_TOL: f64 = 1e-12;

/// `ε = −sign(vz(0))`: the stage-1 rotation sense that reaches the z axis
/// first.
pub fn epsilon_sign(vz0: f64) -> Result<Sign> {
    if vz0 > 0.0 {
        Ok(Sign::Minus)
    } else if vz0 < 0.0 {
        Ok(Sign::Plus)
    } else {
        Err(Error::NoPurityReserve)
    }
}

/// Transverse phase of the initial state in `[0, 2π)`.
pub fn phase_theta(vx0: f64, vy0: f64) -> Result<f64> {
    if vx0 == 0.0 && vy0 == 0.0 {
        return Err(Error::ZeroCoherence);
    }
    let theta = vy0.atan2(vx0);
    let theta = if theta < 0.0 { theta + TAU } else { theta };
    // atan2 of a tiny negative angle can round up to exactly 2π
    Ok(if theta >= TAU { 0.0 } else { theta })
}

fn check_purity_coherence(c: f64, p: f64) -> Result<()> {
    if !(c.is_finite() && p.is_finite()) || c < 0.0 {
        return Err(Error::InvalidState(format!(
            "invalid purity/coherence ({p}, {c})"
        )));
    }
    if c == 0.0 {
        return Err(Error::ZeroCoherence);
    }
    if c >= p {
        return Err(Error::NoPurityReserve);
    }
    if p > 1.0 + crate::bloch::BALL_TOLERANCE {
        return Err(Error::InvalidState(format!("purity {p} exceeds 1")));
    }
    Ok(())
}

/// Stage-1 duration: first time the transverse component vanishes.
pub fn dt1_exact(u: f64, gamma: f64, c: f64, p: f64) -> Result<f64> {
    check_oscillatory(u, gamma)?;
    check_purity_coherence(c, p)?;
    let w = oscillation_width(u, gamma);
    let (rc, rz) = (c.sqrt(), (p - c).sqrt());
    let dt1 = 4.0 / w * (w * rc / (gamma * rc + 2.0 * u * rz)).atan();
    if !(dt1.is_finite() && dt1 > 0.0) {
        return Err(out_of_range(u, gamma));
    }
    Ok(dt1)
}

fn out_of_range(u: f64, gamma: f64) -> Error {
    Error::InvalidParams(format!(
        "u = {u:e}, gamma = {gamma:e}: stage equations leave the floating-point range"
    ))
}

/// `vz` at the end of stage 1, started from `(vx0, 0, vz0)`.
pub fn vz_after_stage1(u: f64, gamma: f64, vx0: f64, vz0: f64, dt1: f64, epsilon: Sign) -> Result<f64> {
    check_oscillatory(u, gamma)?;
    if vz0 == 0.0 {
        return Err(Error::NoPurityReserve);
    }
    let w = oscillation_width(u, gamma);
    let phase = 0.25 * w * dt1;
    let slope = (gamma * vz0 - 2.0 * epsilon.value() * u * vx0) / (w * vz0);
    Ok(vz0 * (-0.25 * gamma * dt1).exp() * phase.cos() * (1.0 + slope * phase.tan()))
}

/// Residuals `(tan − rhs, sin − rhs)` of the two stage-duration equations.
pub fn system_residuals(u: f64, gamma: f64, c: f64, p: f64, dt1: f64, dt3: f64) -> [f64; 2] {
    let w = oscillation_width(u, gamma);
    let (rc, rz) = (c.sqrt(), (p - c).sqrt());
    // tan(Ω dt1) = w√c / (γ√c + 2u√(p−c)), cross-multiplied and normalised so
    // the residual stays O(1) near the tangent pole
    let (a, b) = (gamma * rc + 2.0 * u * rz, w * rc);
    let (sin1, cos1) = (0.25 * w * dt1).sin_cos();
    let line1 = (a * sin1 - b * cos1) / a.hypot(b);
    [line1, stage3_residual(u, gamma, c, p, dt1, dt3)]
}

fn stage3_residual(u: f64, gamma: f64, c: f64, p: f64, dt1: f64, dt3: f64) -> f64 {
    let w = oscillation_width(u, gamma);
    let rc = c.sqrt();
    let denom = 2.0 * (u * u * p + gamma * u * rc * (p - c).sqrt()).sqrt();
    (0.25 * w * dt3).sin() - (0.25 * gamma * (dt1 + dt3)).exp() * w * rc / denom
}

/// Stage-3 duration: the first positive root of the second stage equation.
///
/// The root is unique on `(0, t_peak]`, where `t_peak` maximises
/// `sin(Ω t) e^{−γt/4}`; past that point the damped sine only shrinks. The
/// bracket starts at the large-field estimate and doubles up to `t_peak`.
pub fn dt3_solve(u: f64, gamma: f64, c: f64, p: f64, dt1: f64) -> Result<f64> {
    dt3_solve_tol(u, gamma, c, p, dt1, ModelParams::DEFAULT_ROOT_TOL)
}

fn dt3_solve_tol(u: f64, gamma: f64, c: f64, p: f64, dt1: f64, tol: f64) -> Result<f64> {
    check_oscillatory(u, gamma)?;
    check_purity_coherence(c, p)?;
    let w = oscillation_width(u, gamma);
    let omega = 0.25 * w;
    let t_peak = (w / gamma).atan() / omega;
    let f = |t: f64| stage3_residual(u, gamma, c, p, dt1, t);

    if !(t_peak.is_finite() && t_peak > 0.0 && f(0.0) < 0.0) {
        return Err(out_of_range(u, gamma));
    }

    let seed = approx_dt3(u, c.sqrt(), (p - c).sqrt())?;
    let mut hi = if seed.is_finite() && seed > 0.0 {
        seed.min(t_peak)
    } else {
        t_peak
    };
    while f(hi) < 0.0 && hi < t_peak {
        hi = (2.0 * hi).min(t_peak);
    }
    match f(hi) {
        v if v < 0.0 => return Err(Error::NoRecoveryAtThisField { u }),
        v if !(v.is_finite() && hi > 0.0) => return Err(out_of_range(u, gamma)),
        _ => {}
    }
    let root = bisect(f, 0.0, hi);
    let residual = f(root).abs();
    if residual > tol {
        return Err(Error::RootNotConverged { residual, tol });
    }
    Ok(root)
}

/// Large-field estimate `(2/u) arctan |vx0 / vz0|` of `dt1`. Only accurate
/// for `u ≫ γ/2`.
pub fn approx_dt1(u: f64, vx0: f64, vz0: f64) -> Result<f64> {
    if vz0 == 0.0 {
        return Err(Error::NoPurityReserve);
    }
    Ok(2.0 / u * (vx0 / vz0).abs().atan())
}

/// Large-field estimate `(2/u) arcsin(|vx0| / √(vz0² + vx0²))` of `dt3`.
pub fn approx_dt3(u: f64, vx0: f64, vz0: f64) -> Result<f64> {
    if vz0 == 0.0 {
        return Err(Error::NoPurityReserve);
    }
    Ok(2.0 / u * (vx0.abs() / vx0.hypot(vz0)).asin())
}

/// Input of [`synthesize`]: model, initial state, horizon and an optional
/// prescribed field magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthesisProblem {
    params: ModelParams,
    initial: BlochState,
    horizon: f64,
    fixed_u: Option<f64>,
}

impl SynthesisProblem {
    pub fn new(params: ModelParams, initial: BlochState, horizon: f64, fixed_u: Option<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "horizon must be > 0, got {horizon}"
            )));
        }
        if let Some(u) = fixed_u {
            if !(u.is_finite() && u > 0.0) {
                return Err(Error::InvalidParams(format!("u must be > 0, got {u}")));
            }
        }
        if coherence(&initial) == 0.0 {
            return Err(Error::ZeroCoherence);
        }
        if initial.vz() == 0.0 {
            return Err(Error::NoPurityReserve);
        }
        Ok(Self {
            params,
            initial,
            horizon,
            fixed_u,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn initial(&self) -> &BlochState {
        &self.initial
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn fixed_u(&self) -> Option<f64> {
        self.fixed_u
    }

    pub fn purity(&self) -> f64 {
        purity(&self.initial)
    }

    pub fn coherence(&self) -> f64 {
        coherence(&self.initial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub schedule: ControlSchedule,
    pub dt1: f64,
    pub dt3: f64,
    /// `T − dt1 − dt3`, the hold-stage length.
    pub slack: f64,
    pub residuals: [f64; 2],
}

/// Stage durations `(dt1, dt3)` at field `u`.
pub fn stage_durations(u: f64, gamma: f64, c: f64, p: f64) -> Result<(f64, f64)> {
    let dt1 = dt1_exact(u, gamma, c, p)?;
    let dt3 = dt3_solve(u, gamma, c, p, dt1)?;
    Ok((dt1, dt3))
}

/// Smallest field whose stage durations fit in `AUTO_U_SLACK · T`.
fn auto_field(problem: &SynthesisProblem) -> Result<f64> {
    let (gamma, c, p) = (problem.gamma(), problem.coherence(), problem.purity());
    let tol = problem.params.root_tol;
    let budget = AUTO_U_SLACK * problem.horizon;
    // fields whose stage equations leave the floating-point range count as
    // not fitting, so the search moves on to representable ones
    let fits = |u: f64| -> Result<bool> {
        let dt1 = match dt1_exact(u, gamma, c, p) {
            Ok(dt1) => dt1,
            Err(Error::InvalidParams(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        match dt3_solve_tol(u, gamma, c, p, dt1, tol) {
            Ok(dt3) => Ok(dt1 + dt3 <= budget),
            Err(Error::NoRecoveryAtThisField { .. } | Error::InvalidParams(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };

    let lo = 0.5 * gamma * (1.0 + 1e-6);
    if fits(lo)? {
        return Ok(lo);
    }
    // seed with the large-field estimate, where (approx dt1 + approx dt3) = budget
    let (vx0, vz0) = (c.sqrt(), (p - c).sqrt());
    let estimate = (approx_dt1(1.0, vx0, vz0)? + approx_dt3(1.0, vx0, vz0)?) / budget;
    let mut below = lo;
    let mut hi = if estimate.is_finite() {
        estimate.max(2.0 * lo)
    } else {
        2.0 * lo
    };
    let mut doublings = 0;
    while !fits(hi)? {
        doublings += 1;
        if doublings > AUTO_U_MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Infeasible {
                horizon: problem.horizon,
                u: hi,
                required: f64::INFINITY,
            });
        }
        below = hi;
        hi *= 2.0;
    }
    let mut failure = None;
    let u = bisect_threshold(
        |u| match fits(u) {
            Ok(ok) => ok,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        },
        below,
        hi,
        AUTO_U_REL_TOL,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(u),
    }
}

/// Builds the recovery schedule for `problem`.
///
/// With a prescribed field the stage durations are computed directly and the
/// horizon is checked to accommodate them. Otherwise the smallest feasible
/// field is searched for by bisection over a doubling bracket.
pub fn synthesize(problem: &SynthesisProblem) -> Result<SynthesisResult> {
    let (gamma, c, p) = (problem.gamma(), problem.coherence(), problem.purity());
    let initial = problem.initial;
    let epsilon = epsilon_sign(initial.vz())?;
    let theta = phase_theta(initial.vx(), initial.vy())?;

    let u = match problem.fixed_u {
        Some(u) => u,
        None => auto_field(problem)?,
    };
    let dt1 = dt1_exact(u, gamma, c, p)?;
    let dt3 = dt3_solve_tol(u, gamma, c, p, dt1, problem.params.root_tol)?;
    if dt1 + dt3 > problem.horizon {
        return Err(Error::Infeasible {
            horizon: problem.horizon,
            u,
            required: dt1 + dt3,
        });
    }
    let slack = (problem.horizon - dt1 - dt3).max(0.0);
    let residuals = system_residuals(u, gamma, c, p, dt1, dt3);
    let schedule = ControlSchedule::new(epsilon, theta, u, dt1, slack, dt3)?;
    Ok(SynthesisResult {
        schedule,
        dt1,
        dt3,
        slack,
        residuals,
    })
}

/// Outcome of replaying a schedule through both propagators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationReport {
    pub target_coherence: f64,
    pub final_coherence: f64,
    pub final_coherence_rk4: f64,
    /// `|C(T) − C(0)|` from the closed-form propagator.
    pub coherence_error: f64,
    /// `|C(T) − C(0)|` from the Runge-Kutta oracle.
    pub coherence_error_rk4: f64,
    pub final_purity: f64,
    /// Largest per-component gap between the two propagators over the
    /// oracle's sample times.
    pub oracle_gap: f64,
}

pub fn verify(result: &SynthesisResult, problem: &SynthesisProblem) -> Result<VerificationReport> {
    verify_schedule(&result.schedule, problem.initial(), problem.params())
}

/// Runs `schedule` from `initial` in closed form and with RK4 at
/// `params.ode_step`, and compares the final coherence to the initial one.
pub fn verify_schedule(
    schedule: &ControlSchedule,
    initial: &BlochState,
    params: &ModelParams,
) -> Result<VerificationReport> {
    let gamma = params.gamma;
    let horizon = schedule.horizon();
    let target = coherence(initial);
    let closed = state_at(schedule, initial, gamma, horizon)?;

    let (rk4_final, oracle_gap) = if horizon > 0.0 {
        let oracle = integrate_rk4(initial, schedule, gamma, 0.0, horizon, params.ode_step)?;
        let mut gap = 0.0f64;
        for sample in &oracle {
            let exact = state_at(schedule, initial, gamma, sample.t)?;
            gap = gap.max(exact.max_abs_diff(&sample.state));
        }
        (oracle.last().map(|s| s.state).unwrap_or(*initial), gap)
    } else {
        (*initial, 0.0)
    };

    Ok(VerificationReport {
        target_coherence: target,
        final_coherence: coherence(&closed),
        final_coherence_rk4: coherence(&rk4_final),
        coherence_error: (coherence(&closed) - target).abs(),
        coherence_error_rk4: (coherence(&rk4_final) - target).abs(),
        final_purity: purity(&closed),
        oracle_gap,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::dynamics::propagate_constant_y;

    const GAMMA: f64 = 0.1;
    const C: f64 = 0.3;
    const P: f64 = 0.8;

    fn example_problem(horizon: f64, u: Option<f64>) -> SynthesisProblem {
        let s = BlochState::new(C.sqrt(), 0.0, (P - C).sqrt()).unwrap();
        SynthesisProblem::new(ModelParams::new(GAMMA).unwrap(), s, horizon, u).unwrap()
    }

    #[test]
    fn extreme_fields_are_reported_not_bisected() {
        let state = BlochState::from_purity_coherence(0.8, 0.3, 0.0, true).unwrap();
        for (gamma, u) in [(0.1, 1e300), (1e300, 1e300), (1e-300, 5.000005e-301)] {
            let params = ModelParams::new(gamma).unwrap();
            let problem = SynthesisProblem::new(params, state, 10.0, Some(u)).unwrap();
            assert!(
                matches!(synthesize(&problem), Err(Error::InvalidParams(_))),
                "gamma {gamma}, u {u}"
            );
        }
        // the automatic search steps past unrepresentable fields
        let params = ModelParams::new(1e-300).unwrap();
        let problem = SynthesisProblem::new(params, state, 1e-6, None).unwrap();
        let result = synthesize(&problem).unwrap();
        assert!(result.dt1 + result.dt3 <= 1e-6);
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_sign(0.5f64.sqrt()), Ok(Sign::Minus));
        assert_eq!(epsilon_sign(-0.3), Ok(Sign::Plus));
        assert_eq!(epsilon_sign(0.0), Err(Error::NoPurityReserve));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(phase_theta(C.sqrt(), 0.0), Ok(0.0));
        assert!((phase_theta(0.0, 0.5).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((phase_theta(-0.4, 0.0).unwrap() - PI).abs() < 1e-15);
        assert!((phase_theta(0.0, -0.5).unwrap() - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert_eq!(phase_theta(0.0, 0.0), Err(Error::ZeroCoherence));
        let t = phase_theta(1.0, -1e-300).unwrap();
        assert!((0.0..TAU).contains(&t));
    }

    #[test]
    fn dt1_example_and_residual() {
        let dt1 = dt1_exact(0.2, GAMMA, C, P).unwrap();
        assert!((dt1 - 5.79).abs() < 0.01);
        let [r1, _] = system_residuals(0.2, GAMMA, C, P, dt1, 1.0);
        assert!(r1.abs() <= 1e-12);
        assert!(matches!(
            dt1_exact(0.05, GAMMA, C, P),
            Err(Error::OverdampedRegime { .. })
        ));
    }

    #[test]
    fn dt1_zeroes_transverse_component() {
        let dt1 = dt1_exact(0.2, GAMMA, C, P).unwrap();
        let s = BlochState::new(C.sqrt(), 0.0, (P - C).sqrt()).unwrap();
        let out = propagate_constant_y(&s, 0.2, Sign::Minus, GAMMA, dt1).unwrap();
        assert!(out.vx().abs() < 1e-10);
    }

    #[test]
    fn dt1_large_field_matches_approximation() {
        let dt1 = dt1_exact(100.0, GAMMA, C, P).unwrap();
        let approx = approx_dt1(100.0, C.sqrt(), (P - C).sqrt()).unwrap();
        assert!((dt1 - 0.01318).abs() < 1e-5);
        assert!((dt1 - approx).abs() / dt1 < 0.01);
    }

    #[test]
    fn approximations_are_poor_at_small_field() {
        let dt1 = dt1_exact(0.2, GAMMA, C, P).unwrap();
        let approx = approx_dt1(0.2, C.sqrt(), (P - C).sqrt()).unwrap();
        let rel = (approx - dt1).abs() / dt1;
        assert!(rel > 0.10 && rel < 0.20, "relative gap {rel}");
    }

    #[test]
    fn approximation_examples() {
        let a1 = approx_dt1(100.0, C.sqrt(), (P - C).sqrt()).unwrap();
        let a3 = approx_dt3(100.0, C.sqrt(), (P - C).sqrt()).unwrap();
        assert!((a1 - 0.013182).abs() < 1e-6);
        assert!((a3 - 0.013182).abs() < 1e-6);
        assert!((approx_dt1(4.0, 0.3, 0.3).unwrap() - 0.5 * FRAC_PI_4).abs() < 1e-15);
        assert_eq!(approx_dt1(1.0, 0.3, 0.0), Err(Error::NoPurityReserve));
        assert_eq!(approx_dt3(1.0, 0.3, 0.0), Err(Error::NoPurityReserve));
    }

    #[test]
    fn vz_after_stage1_examples() {
        let (vx0, vz0) = (C.sqrt(), (P - C).sqrt());
        let dt1 = dt1_exact(0.2, GAMMA, C, P).unwrap();
        let vz1 = vz_after_stage1(0.2, GAMMA, vx0, vz0, dt1, Sign::Minus).unwrap();
        assert!((vz1 - 0.8624).abs() < 1e-4);
        let s = BlochState::new(vx0, 0.0, vz0).unwrap();
        let direct = propagate_constant_y(&s, 0.2, Sign::Minus, GAMMA, dt1).unwrap();
        assert!((direct.vz() - vz1).abs() < 1e-13);
        assert_eq!(
            vz_after_stage1(0.2, GAMMA, vx0, vz0, 0.0, Sign::Minus).unwrap(),
            vz0
        );
    }

    #[test]
    fn dt3_example() {
        let dt1 = dt1_exact(0.2, GAMMA, C, P).unwrap();
        let dt3 = dt3_solve(0.2, GAMMA, C, P, dt1).unwrap();
        assert!((dt3 - 9.11).abs() < 0.01);
        let [r1, r2] = system_residuals(0.2, GAMMA, C, P, dt1, dt3);
        assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12);
    }

    #[test]
    fn dt3_restores_transverse_component() {
        let dt1 = dt1_exact(0.2, GAMMA, C, P).unwrap();
        let dt3 = dt3_solve(0.2, GAMMA, C, P, dt1).unwrap();
        let vz1 = vz_after_stage1(0.2, GAMMA, C.sqrt(), (P - C).sqrt(), dt1, Sign::Minus).unwrap();
        let start = BlochState::new(0.0, 0.0, vz1).unwrap();
        let end = propagate_constant_y(&start, 0.2, Sign::Plus, GAMMA, dt3).unwrap();
        assert!((end.vx() * end.vx() - C).abs() < 1e-9);
    }

    #[test]
    fn dt3_large_field_matches_approximation() {
        let dt1 = dt1_exact(100.0, GAMMA, C, P).unwrap();
        let dt3 = dt3_solve(100.0, GAMMA, C, P, dt1).unwrap();
        let approx = approx_dt3(100.0, C.sqrt(), (P - C).sqrt()).unwrap();
        assert!((dt3 - approx).abs() / dt3 < 0.01);
    }

    #[test]
    fn dt3_reports_insufficient_field() {
        let u = 0.0505;
        let dt1 = dt1_exact(u, GAMMA, C, P).unwrap();
        assert_eq!(
            dt3_solve(u, GAMMA, C, P, dt1),
            Err(Error::NoRecoveryAtThisField { u })
        );
    }

    #[test]
    fn synthesize_reference_scenario() {
        let r = synthesize(&example_problem(20.0, Some(0.2))).unwrap();
        assert!((r.dt1 - 5.79).abs() < 0.01);
        assert!((r.dt3 - 9.11).abs() < 0.01);
        assert!((r.slack - 5.10).abs() < 0.01);
        assert!((r.dt1 + r.dt3 - 14.90).abs() < 0.01);
        assert_eq!(r.schedule.epsilon(), Sign::Minus);
        assert_eq!(r.schedule.theta(), 0.0);
        assert!(r.residuals.iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn synthesize_short_horizon_is_infeasible() {
        let err = synthesize(&example_problem(10.0, Some(0.2))).unwrap_err();
        assert!(matches!(err, Error::Infeasible { horizon, u, .. } if horizon == 10.0 && u == 0.2));
    }

    #[test]
    fn synthesize_rotated_state() {
        let s = BlochState::new(0.0, C.sqrt(), (P - C).sqrt()).unwrap();
        let problem = SynthesisProblem::new(ModelParams::new(GAMMA).unwrap(), s, 20.0, Some(0.2)).unwrap();
        let r = synthesize(&problem).unwrap();
        let base = synthesize(&example_problem(20.0, Some(0.2))).unwrap();
        assert!((r.schedule.theta() - FRAC_PI_2).abs() < 1e-15);
        assert!((r.dt1 - base.dt1).abs() < 1e-12);
        assert!((r.dt3 - base.dt3).abs() < 1e-12);
    }

    #[test]
    fn auto_field_fills_horizon_with_slack() {
        let problem = example_problem(20.0, None);
        let r = synthesize(&problem).unwrap();
        let u = r.schedule.u();
        assert!(u > GAMMA / 2.0);
        assert!(r.slack > 0.0);
        assert!(r.dt1 + r.dt3 <= AUTO_U_SLACK * 20.0);
        // slightly weaker fields no longer fit
        let weaker = u * (1.0 - 1e-9);
        match stage_durations(weaker, GAMMA, C, P) {
            Ok((a, b)) => assert!(a + b > AUTO_U_SLACK * 20.0),
            Err(e) => assert!(matches!(e, Error::NoRecoveryAtThisField { .. })),
        }
    }

    #[test]
    fn problem_validation() {
        let params = ModelParams::new(GAMMA).unwrap();
        let pole = BlochState::new(0.0, 0.0, 0.9).unwrap();
        assert_eq!(
            SynthesisProblem::new(params, pole, 1.0, None),
            Err(Error::ZeroCoherence)
        );
        let equator = BlochState::new(0.5, 0.0, 0.0).unwrap();
        assert_eq!(
            SynthesisProblem::new(params, equator, 1.0, None),
            Err(Error::NoPurityReserve)
        );
        let s = BlochState::new(0.5, 0.0, 0.5).unwrap();
        assert!(SynthesisProblem::new(params, s, 0.0, None).is_err());
        assert!(SynthesisProblem::new(params, s, 1.0, Some(-1.0)).is_err());
    }

    #[test]
    fn verify_reference_scenario() {
        let problem = example_problem(20.0, Some(0.2));
        let r = synthesize(&problem).unwrap();
        let report = verify(&r, &problem).unwrap();
        assert!(report.coherence_error <= 1e-9);
        assert!(report.coherence_error_rk4 <= 1e-6);
        assert!((report.final_purity - 0.63).abs() <= 0.005);
        assert!(report.oracle_gap <= 1e-6);
    }

    #[test]
    fn verify_degenerate_schedule() {
        let pole = BlochState::new(0.0, 0.0, 0.6).unwrap();
        let schedule = ControlSchedule::new(Sign::Minus, 0.0, 1.0, 0.0, 3.0, 0.0).unwrap();
        let report = verify_schedule(&schedule, &pole, &ModelParams::new(GAMMA).unwrap()).unwrap();
        assert_eq!(report.target_coherence, 0.0);
        assert_eq!(report.final_coherence, 0.0);
        assert_eq!(report.coherence_error, 0.0);
    }
}
