//! Configuration, subcommands and file formats of the `casimir` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;

pub use error::CliError;
