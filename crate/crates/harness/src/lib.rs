//! Manifest-driven runs, parameter sweeps and the validation suite.

pub mod config;
pub mod presets;
pub mod run;
pub mod setup;
pub mod validate;
