//! Command line and HTTP service over the chase engine.

pub mod api;
pub mod bundle;
pub mod cli;
pub mod error;
pub mod server;
