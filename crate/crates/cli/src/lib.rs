//! Command-line front end: JSON problem files in, JSON reports out.

pub mod assemble;
pub mod commands;
pub mod error;
pub mod report;
pub mod schema;

pub use commands::{run, Cli, Command, Output};
pub use error::{exit, CliError};
