//! Command-line front end for `gvf-core`: configuration, file formats, synthetic test images
//! and randomized diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod synth;

pub use cli::run_cli;
pub use config::SegmentationConfig;
pub use error::CliError;
