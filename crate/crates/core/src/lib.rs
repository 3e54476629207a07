//! Open-loop unitary control of the coherence of a pure dephasing qubit.
//!
//! A qubit under pure dephasing loses its transverse Bloch components at rate
//! `γ/2` while `vz` is untouched. Coherence can be held constant only up to
//! the breakdown time `(p − c)/(γ c)`. To recover the initial coherence after
//! an arbitrary horizon `T`, the state is rotated onto the z axis (where
//! dephasing has no effect), parked there, and rotated back out.
//!
//! - [`bloch`]: states, density matrices, purity, coherence, breakdown time.
//! - [`dynamics`]: control schedules, closed-form propagation and an RK4
//!   oracle.
//! - [`synthesis`]: stage-duration equations and schedule synthesis.
//! - [`limit`]: limit time, limit field and its upper bound.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod limit;
mod root;
pub mod synthesis;

pub use bloch::{
    breakdown_time, coherence, from_density_matrix, purity, to_density_matrix, BlochState, DensityMatrix,
    ModelParams,
};
pub use dynamics::{
    control_field_at, derivative, free_propagate, integrate_rk4, propagate_constant_y, simulate, state_at,
    ControlField, ControlSchedule, Sample, Sign, Stage, Trajectory,
};
pub use error::{Error, Result};
pub use limit::{
    limit_regime_check, solve_limit_system, u_upper_bound, FieldBound, LimitRegime, LimitSolution,
};
pub use synthesis::{
    approx_dt1, approx_dt3, dt1_exact, dt3_solve, epsilon_sign, phase_theta, synthesize, verify,
    verify_schedule, vz_after_stage1, SynthesisProblem, SynthesisResult, VerificationReport,
};
