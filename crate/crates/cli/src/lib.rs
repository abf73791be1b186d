//! Batch harness for the world-tube comparison: strict JSON configuration,
//! the `verify`, `compare` and `sweep` commands, and their JSON and CSV output.

pub mod config;
pub mod report;
pub mod run;
