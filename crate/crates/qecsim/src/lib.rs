//! Std companion to `qecsim-core`: run configuration, file formats, a
//! thread-pool executor and the command implementations behind the `qecsim`
//! binary.

pub mod config;
pub mod exec;
pub mod format;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use exec::Pool;
