//! Configuration, per-clip pipeline, batch commands and SVG output.

mod commands;
mod config;
mod pipeline;
pub mod svg;

pub use commands::*;
pub use config::*;
pub use pipeline::*;
