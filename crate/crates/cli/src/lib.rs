//! Command-line runner for the clinical AI adoption model: JSON configs,
//! CSV outputs, run manifests and the acceptance checks.

pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod run;
pub mod verify;
