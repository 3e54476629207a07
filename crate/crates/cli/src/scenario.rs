//! Scenario files: flat JSON with the model, the initial state and the run
//! settings.

use std::fs;
use std::path::{Path, PathBuf};

use coherence_control::{BlochState, ControlSchedule, ModelParams, SynthesisProblem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SAMPLE_STEP: f64 = 0.01;
pub const MAX_ORACLE_STEPS: f64 = 1e6;

/// The initial state is given either explicitly as `vx, vy, vz` or as
/// `purity, coherence` with optional `theta` (default 0) and `vz_sign`
/// (default +1). Mixing the two forms is an error.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub gamma: f64,
    pub vx: Option<f64>,
    pub vy: Option<f64>,
    pub vz: Option<f64>,
    pub purity: Option<f64>,
    pub coherence: Option<f64>,
    pub theta: Option<f64>,
    pub vz_sign: Option<i8>,
    #[serde(rename = "horizon_T")]
    pub horizon: Option<f64>,
    pub u: Option<f64>,
    #[serde(default = "default_sample_step")]
    pub sample_step: f64,
    pub output_path: Option<PathBuf>,
}

fn default_sample_step() -> f64 {
    DEFAULT_SAMPLE_STEP
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Model parameters. The RK4 oracle step grows with the horizon so that
    /// verification never takes more than `MAX_ORACLE_STEPS` steps.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let ode_step = match self.horizon {
            Some(t) if t.is_finite() && t > 0.0 => ModelParams::DEFAULT_ODE_STEP.max(t / MAX_ORACLE_STEPS),
            _ => ModelParams::DEFAULT_ODE_STEP,
        };
        Ok(ModelParams::with_tolerances(
            self.gamma,
            ModelParams::DEFAULT_ROOT_TOL,
            ode_step,
        )?)
    }

    pub fn initial(&self) -> Result<BlochState, CliError> {
        let explicit = self.vx.is_some() || self.vy.is_some() || self.vz.is_some();
        let polar = self.purity.is_some()
            || self.coherence.is_some()
            || self.theta.is_some()
            || self.vz_sign.is_some();
        match (explicit, polar) {
            (true, true) => Err(CliError::Config(
                "initial state given both as vx/vy/vz and as purity/coherence; use one form".into(),
            )),
            (false, false) => Err(CliError::Config(
                "missing initial state: give vx, vy, vz or purity, coherence".into(),
            )),
            (true, false) => {
                let vx = self.vx.ok_or_else(|| missing("vx"))?;
                let vy = self.vy.ok_or_else(|| missing("vy"))?;
                let vz = self.vz.ok_or_else(|| missing("vz"))?;
                Ok(BlochState::new(vx, vy, vz)?)
            }
            (false, true) => {
                let p = self.purity.ok_or_else(|| missing("purity"))?;
                let c = self.coherence.ok_or_else(|| missing("coherence"))?;
                let positive = match self.vz_sign.unwrap_or(1) {
                    1 => true,
                    -1 => false,
                    other => return Err(CliError::Config(format!("vz_sign must be 1 or -1, got {other}"))),
                };
                Ok(BlochState::from_purity_coherence(
                    p,
                    c,
                    self.theta.unwrap_or(0.0),
                    positive,
                )?)
            }
        }
    }

    pub fn horizon(&self) -> Result<f64, CliError> {
        self.horizon.ok_or_else(|| missing("horizon_T"))
    }

    pub fn problem(&self) -> Result<SynthesisProblem, CliError> {
        Ok(SynthesisProblem::new(
            self.params()?,
            self.initial()?,
            self.horizon()?,
            self.u,
        )?)
    }
}

/// Schedule file: the control parameters plus the damping they were
/// synthesised for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    #[serde(flatten)]
    pub schedule: ControlSchedule,
    pub gamma: f64,
}

impl ScheduleRecord {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Schedule {
            path: path.into(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Schedule {
            path: path.into(),
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("schedule serialises");
        text.push('\n');
        text
    }
}
