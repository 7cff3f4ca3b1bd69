//! Experiment runner: configs, scenarios, CSV tables, and SVG plots.

pub mod config;
pub mod scenario;
pub mod svg;
pub mod table;
