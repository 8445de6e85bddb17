//! Experiment harness around `vb-core`: configuration, the staged pipeline
//! and SVG rendering.

pub mod config;
pub mod pipeline;
pub mod render;

pub use config::{ExperimentConfig, Z0Rule};
pub use pipeline::{run_experiment, RunReport};
pub use render::{render_svg, Layer};
