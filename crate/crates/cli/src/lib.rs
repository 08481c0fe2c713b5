//! Experiment runner: parse a config, dispatch to the computational
//! modules, emit reproducible CSV reports and a summary.

pub mod config;
pub mod report;
pub mod run;
