//! Command-line front end: configuration, stage orchestration, report files
//! and SVG charts.

pub mod commands;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod svg;

pub use config::RunConfig;
pub use pipeline::{run_pipeline, Manifest, PipelineError, Stage};
