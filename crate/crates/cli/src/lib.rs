//! Command-line front end and HTTP service for the RPYS toolchain.

pub mod commands;
pub mod server;
