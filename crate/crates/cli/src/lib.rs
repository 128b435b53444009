//! Experiment configs and the end-to-end pipeline behind the `clorbit` binary.

pub mod config;
pub mod json;
pub mod pipeline;

pub use config::{Experiment, ExperimentConfig};
