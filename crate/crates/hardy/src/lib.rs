//! Command-line layer over `hardy_core`: builtin inputs, serialization and
//! parallel drivers.

pub mod builtins;
pub mod cli;
pub mod error;
pub mod io;
pub mod runners;

pub use error::{CliError, CliResult};
