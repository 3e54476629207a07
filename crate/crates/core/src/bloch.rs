//! Bloch-vector representation of a single qubit and the scalar functionals
//! built on it.
//!
//! Purity here is the squared Bloch norm `vx² + vy² + vz²`, not `Tr ρ²`
//! (the two are related by `Tr ρ² = (1 + |v|²) / 2`). Coherence is the
//! squared transverse norm `vx² + vy²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on Bloch-ball membership, absorbs floating-point drift from the
/// propagators.
pub const BALL_TOLERANCE: f64 = 1e-9;

const MATRIX_TOLERANCE: f64 = 1e-12;

/// A point of the Bloch ball. Validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    vx: f64,
    vy: f64,
    vz: f64,
}

impl BlochState {
    pub fn new(vx: f64, vy: f64, vz: f64) -> Result<Self> {
        if !(vx.is_finite() && vy.is_finite() && vz.is_finite()) {
            return Err(Error::InvalidState(format!(
                "non-finite component in ({vx}, {vy}, {vz})"
            )));
        }
        let norm2 = vx * vx + vy * vy + vz * vz;
        if norm2 > 1.0 + BALL_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "|v|² = {norm2} lies outside the Bloch ball"
            )));
        }
        Ok(Self { vx, vy, vz })
    }

    /// Builds a state from purity, coherence, transverse phase and the sign
    /// of `vz`: `v = (√c cos θ, √c sin θ, ±√(p − c))`.
    pub fn from_purity_coherence(p: f64, c: f64, theta: f64, vz_positive: bool) -> Result<Self> {
        if !(p.is_finite() && c.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidState("non-finite purity/coherence/phase".into()));
        }
        if c < 0.0 || c > p || p > 1.0 + BALL_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "need 0 <= c <= p <= 1, got p = {p}, c = {c}"
            )));
        }
        let r = c.sqrt();
        let vz = (p - c).sqrt();
        Self::new(
            r * theta.cos(),
            r * theta.sin(),
            if vz_positive { vz } else { -vz },
        )
    }

    /// Skips validation; used by the propagators whose outputs stay in the
    /// ball by construction.
    pub(crate) fn from_components(vx: f64, vy: f64, vz: f64) -> Self {
        Self { vx, vy, vz }
    }

    pub fn vx(&self) -> f64 {
        self.vx
    }

    pub fn vy(&self) -> f64 {
        self.vy
    }

    pub fn vz(&self) -> f64 {
        self.vz
    }

    pub fn components(&self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }

    /// Rotation by `angle` about the z axis.
    pub fn rotate_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_components(c * self.vx - s * self.vy, s * self.vx + c * self.vy, self.vz)
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &BlochState) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for BlochState {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            vx: f64,
            vy: f64,
            vz: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        BlochState::new(raw.vx, raw.vy, raw.vz).map_err(serde::de::Error::custom)
    }
}

/// Model constants shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Dephasing rate (1/time).
    pub gamma: f64,
    /// Residual tolerance accepted from the root solvers.
    pub root_tol: f64,
    /// Step of the Runge-Kutta oracle.
    pub ode_step: f64,
}

impl ModelParams {
    pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
    pub const DEFAULT_ODE_STEP: f64 = 1e-3;

    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_tolerances(gamma, Self::DEFAULT_ROOT_TOL, Self::DEFAULT_ODE_STEP)
    }

    pub fn with_tolerances(gamma: f64, root_tol: f64, ode_step: f64) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(gamma) {
            return Err(Error::InvalidParams(format!("gamma must be > 0, got {gamma}")));
        }
        if !positive(root_tol) {
            return Err(Error::InvalidParams(format!(
                "root_tol must be > 0, got {root_tol}"
            )));
        }
        if !positive(ode_step) {
            return Err(Error::InvalidParams(format!(
                "ode_step must be > 0, got {ode_step}"
            )));
        }
        Ok(Self {
            gamma,
            root_tol,
            ode_step,
        })
    }
}

/// `vx² + vy² + vz²`.
pub fn purity(state: &BlochState) -> f64 {
    state.vx * state.vx + state.vy * state.vy + state.vz * state.vz
}

/// `vx² + vy²`.
pub fn coherence(state: &BlochState) -> f64 {
    state.vx * state.vx + state.vy * state.vy
}

/// A 2×2 complex matrix in row-major order. This is a view on a state; use
/// [`from_density_matrix`] to validate and convert back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub entries: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn determinant(&self) -> Complex64 {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    fn validate(&self) -> Result<()> {
        let [[a, b], [c, d]] = self.entries;
        let finite = self
            .entries
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        if a.im.abs() > MATRIX_TOLERANCE
            || d.im.abs() > MATRIX_TOLERANCE
            || (b - c.conj()).norm() > MATRIX_TOLERANCE
        {
            return Err(Error::InvalidDensityMatrix("matrix is not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > MATRIX_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {} not 1", tr.re)));
        }
        if self.determinant().re < -MATRIX_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(
                "matrix is not positive semidefinite".into(),
            ));
        }
        Ok(())
    }
}

/// `ρ = (I + vx σx + vy σy + vz σz) / 2`.
pub fn to_density_matrix(state: &BlochState) -> DensityMatrix {
    let half = |re: f64, im: f64| Complex64::new(re / 2.0, im / 2.0);
    DensityMatrix {
        entries: [
            [half(1.0 + state.vz, 0.0), half(state.vx, -state.vy)],
            [half(state.vx, state.vy), half(1.0 - state.vz, 0.0)],
        ],
    }
}

pub fn from_density_matrix(rho: &DensityMatrix) -> Result<BlochState> {
    rho.validate()?;
    let [[a, _], [c, d]] = rho.entries;
    // ρ₁₀ = (vx + i vy) / 2
    BlochState::new(2.0 * c.re, 2.0 * c.im, a.re - d.re)
}

/// Longest span over which unitary control can hold the coherence constant:
/// `(p − c) / (γ c)`.
pub fn breakdown_time(p: f64, c: f64, gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParams(format!("gamma must be > 0, got {gamma}")));
    }
    if !(p.is_finite() && c.is_finite()) || c < 0.0 {
        return Err(Error::InvalidState(format!(
            "invalid purity/coherence ({p}, {c})"
        )));
    }
    if c == 0.0 {
        return Err(Error::ZeroCoherence);
    }
    if c > p || p > 1.0 + BALL_TOLERANCE {
        return Err(Error::InvalidState(format!(
            "need 0 < c <= p <= 1, got p = {p}, c = {c}"
        )));
    }
    Ok((p - c) / (gamma * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> BlochState {
        BlochState::new(0.3f64.sqrt(), 0.0, 0.5f64.sqrt()).unwrap()
    }

    #[test]
    fn purity_and_coherence_examples() {
        assert!((purity(&example()) - 0.8).abs() < 1e-15);
        assert!((coherence(&example()) - 0.3).abs() < 1e-15);
        let zero = BlochState::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(purity(&zero), 0.0);
        let eq = BlochState::new(0.6, 0.8, 0.0).unwrap();
        assert!((purity(&eq) - 1.0).abs() < 1e-15);
        assert!((coherence(&eq) - 1.0).abs() < 1e-15);
        let pole = BlochState::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(coherence(&pole), 0.0);
    }

    #[test]
    fn rejects_states_outside_ball() {
        assert!(matches!(
            BlochState::new(1.0, 0.1, 0.0),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            BlochState::new(f64::NAN, 0.0, 0.0),
            Err(Error::InvalidState(_))
        ));
        // drift within tolerance is accepted
        assert!(BlochState::new(1.0 + 1e-10, 0.0, 0.0).is_ok());
    }

    #[test]
    fn density_matrix_examples() {
        let rho = to_density_matrix(&BlochState::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(rho.entries[0][0], Complex64::new(0.5, 0.0));
        assert_eq!(rho.entries[1][1], Complex64::new(0.5, 0.0));
        assert_eq!(rho.entries[0][1], Complex64::new(0.0, 0.0));

        let rho = to_density_matrix(&BlochState::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(rho.entries[0][0].re, 1.0);
        assert_eq!(rho.entries[1][1].re, 0.0);

        let rho = to_density_matrix(&example());
        let (s3, s5) = (0.3f64.sqrt(), 0.5f64.sqrt());
        assert!((rho.entries[0][0].re - (1.0 + s5) / 2.0).abs() < 1e-15);
        assert!((rho.entries[1][1].re - (1.0 - s5) / 2.0).abs() < 1e-15);
        assert!((rho.entries[0][1].re - s3 / 2.0).abs() < 1e-15);
        assert!((rho.entries[1][0].re - s3 / 2.0).abs() < 1e-15);
        assert_eq!(rho.entries[0][1].im, 0.0);

        let back = from_density_matrix(&rho).unwrap();
        assert!(back.max_abs_diff(&example()) < 1e-14);
    }

    #[test]
    fn from_density_matrix_known_states() {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mixed = DensityMatrix {
            entries: [[half, zero], [zero, half]],
        };
        assert_eq!(from_density_matrix(&mixed).unwrap().components(), [0.0, 0.0, 0.0]);
        let one = Complex64::new(1.0, 0.0);
        let up = DensityMatrix {
            entries: [[one, zero], [zero, zero]],
        };
        assert_eq!(from_density_matrix(&up).unwrap().components(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn from_density_matrix_rejects_invalid() {
        let z = |re, im| Complex64::new(re, im);
        let non_hermitian = DensityMatrix {
            entries: [[z(0.5, 0.0), z(0.1, 0.0)], [z(0.2, 0.0), z(0.5, 0.0)]],
        };
        assert!(matches!(
            from_density_matrix(&non_hermitian),
            Err(Error::InvalidDensityMatrix(_))
        ));
        let bad_trace = DensityMatrix {
            entries: [[z(0.6, 0.0), z(0.0, 0.0)], [z(0.0, 0.0), z(0.5, 0.0)]],
        };
        assert!(matches!(
            from_density_matrix(&bad_trace),
            Err(Error::InvalidDensityMatrix(_))
        ));
        let complex_diag = DensityMatrix {
            entries: [[z(0.5, 0.1), z(0.0, 0.0)], [z(0.0, 0.0), z(0.5, -0.1)]],
        };
        assert!(matches!(
            from_density_matrix(&complex_diag),
            Err(Error::InvalidDensityMatrix(_))
        ));
        let not_psd = DensityMatrix {
            entries: [[z(0.5, 0.0), z(0.9, 0.0)], [z(0.9, 0.0), z(0.5, 0.0)]],
        };
        assert!(matches!(
            from_density_matrix(&not_psd),
            Err(Error::InvalidDensityMatrix(_))
        ));
    }

    #[test]
    fn breakdown_time_examples() {
        let tb = breakdown_time(0.8, 0.3, 0.1).unwrap();
        assert!((tb - 50.0 / 3.0).abs() < 1e-12);
        assert_eq!(breakdown_time(0.5, 0.5, 1.0).unwrap(), 0.0);
        assert!((breakdown_time(1.0, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn breakdown_time_errors() {
        assert_eq!(breakdown_time(0.8, 0.0, 0.1), Err(Error::ZeroCoherence));
        assert!(matches!(
            breakdown_time(0.3, 0.5, 0.1),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            breakdown_time(1.5, 0.5, 0.1),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            breakdown_time(0.8, 0.3, 0.0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn purity_coherence_constructor() {
        let s = BlochState::from_purity_coherence(0.8, 0.3, 0.0, true).unwrap();
        assert!(s.max_abs_diff(&example()) < 1e-15);
        let s = BlochState::from_purity_coherence(0.8, 0.3, std::f64::consts::FRAC_PI_2, false).unwrap();
        assert!(s.vx().abs() < 1e-15);
        assert!(s.vz() < 0.0);
        assert!(BlochState::from_purity_coherence(0.3, 0.8, 0.0, true).is_err());
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(0.1).is_ok());
        assert!(ModelParams::new(0.0).is_err());
        assert!(ModelParams::with_tolerances(0.1, 0.0, 1e-3).is_err());
        assert!(ModelParams::with_tolerances(0.1, 1e-12, -1.0).is_err());
        let p = ModelParams::new(0.1).unwrap();
        assert_eq!(p.root_tol, 1e-12);
        assert_eq!(p.ode_step, 1e-3);
    }
}
