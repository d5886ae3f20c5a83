//! Experiment runner for the `qwalk` command.

pub mod config;
pub mod dispersion;
pub mod presets;
pub mod run;
pub mod verify;
