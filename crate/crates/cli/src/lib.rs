//! Command-line front end: flag and config handling, output files, plots.

pub mod app;
pub mod config;
pub mod manifest;
pub mod svg;

pub use app::{run, Cli, ExitStatus};
pub use config::{parse_config, ConfigError};
pub use manifest::RunManifest;
pub use svg::{emit_radial_svg, emit_scatter_svg, radial_svg, scatter_svg};
