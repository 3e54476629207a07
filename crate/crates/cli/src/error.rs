use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("cannot read schedule {}: {reason}", path.display())]
    Schedule { path: PathBuf, reason: String },

    #[error(transparent)]
    Model(#[from] coherence_control::Error),

    #[error("{0} comparison(s) outside tolerance")]
    Mismatch(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use coherence_control::Error as E;
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Config(_) | CliError::Io { .. } | CliError::Schedule { .. } => 2,
            CliError::Model(e) => match e {
                E::Infeasible { .. } | E::NoRecoveryAtThisField { .. } | E::OverdampedRegime { .. } => 3,
                E::RootNotConverged { .. } => 3,
                E::ZeroCoherence | E::NoPurityReserve => 4,
                E::NoLimitSolution(_) => 5,
                E::InvalidState(_)
                | E::InvalidDensityMatrix(_)
                | E::InvalidParams(_)
                | E::InvalidSchedule(_)
                | E::OutOfHorizon { .. }
                | E::PlaneViolation { .. }
                | E::InvalidStep(_) => 2,
            },
        }
    }
}
