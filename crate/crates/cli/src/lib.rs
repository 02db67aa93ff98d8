//! Command-line driver for twisted-vortex solves: config parsing, run
//! orchestration and JSON summaries.

pub mod config;
pub mod run;
pub mod summary;

pub use config::{Mode, RunConfig};
pub use run::Failure;
