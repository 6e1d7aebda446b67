//! Pipeline driver and review service.
//!
//! `sciq run --stage <name>` executes pipeline stages against a TOML config;
//! `sciq serve` exposes the computed indicators and collects ratings.

pub mod config;
pub mod pipeline;
pub mod service;

pub use config::PipelineConfig;
pub use pipeline::{run, Layout, Stage, StageSelection};
