//! HTTP API and command line over trained kgrec artifacts.

pub mod api;
pub mod cli;
pub mod session;

pub use session::{ApiError, ApiSession};
