//! Command line, configuration and file formats around `hyperalg-core`.
//!
//! The binary is a thin wrapper over [`cli::main_with`]; everything it does
//! is reachable from here for tests.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod verify;
