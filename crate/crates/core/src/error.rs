use thiserror::Error;

/// Errors raised by state construction, propagation, synthesis and the
/// limit-time solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Bloch state: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid control schedule: {0}")]
    InvalidSchedule(String),

    #[error("initial coherence is zero; there is nothing to recover")]
    ZeroCoherence,

    #[error("vz(0) = 0 (purity equals coherence); no unitary control can recover the coherence")]
    NoPurityReserve,

    #[error("time {t} lies outside the control horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("field magnitude u = {u} is not above gamma/2 = {half_gamma} (overdamped regime)")]
    OverdampedRegime { u: f64, half_gamma: f64 },

    #[error("y-field propagation requires vy = 0, got vy = {vy}")]
    PlaneViolation { vy: f64 },

    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("no stage-3 duration recovers the coherence at u = {u}; increase the field")]
    NoRecoveryAtThisField { u: f64 },

    #[error("horizon T = {horizon} is shorter than dt1 + dt3 = {required} at u = {u}")]
    Infeasible { horizon: f64, u: f64, required: f64 },

    #[error("limit-time system has no solution: {0}")]
    NoLimitSolution(String),

    #[error("root solver stopped with residual {residual:e} above tolerance {tol:e}")]
    RootNotConverged { residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
