//! Command-line front end for `coherence-control`.

pub mod commands;
pub mod error;
pub mod format;
pub mod scenario;

pub use error::CliError;
