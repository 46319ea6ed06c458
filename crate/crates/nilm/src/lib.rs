//! File formats, CSV ingestion and the command-line pipeline around
//! `nilm-core`.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod model_io;
pub mod report_io;

pub use commands::{cmd_baseline, cmd_eval, cmd_predict, cmd_synth, cmd_train};
pub use config::{Overrides, RunConfig};
