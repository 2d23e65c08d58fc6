//! Pipeline driver for the synbuild command-line tool.

pub mod commands;
pub mod config;
pub mod pipeline;

pub use config::{ConfigError, PipelineConfig};
pub use pipeline::{run_generate, RunReport};
