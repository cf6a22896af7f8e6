//! Experiment runner for `drinfeld-core`: JSON configs in, JSON reports and
//! CSV summaries out. Prime scans run on a rayon pool; reports are
//! independent of the number of workers.

pub mod commands;
pub mod config;
pub mod error;
pub mod pool;
pub mod run;

pub use commands::{Command, Overrides};
pub use config::{Config, Context};
pub use error::LabError;
pub use pool::Pool;
pub use run::{run, validate, Diagnostic, Outcome};
