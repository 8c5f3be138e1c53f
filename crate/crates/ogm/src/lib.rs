//! Spec files, sampling runs and reports on top of `ogm-core`.

pub mod config;
pub mod covering;
pub mod output;
pub mod session;
pub mod spec_io;
pub mod verify;

pub use config::{RunConfig, UsageError};
pub use session::Session;
