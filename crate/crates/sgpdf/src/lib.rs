//! File formats, configuration and the `sgpdf` command line around
//! [`sgpdf_core`].

// `!(x > 0.0)` guards deliberately reject NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
