//! Ingestion, synthetic worlds and the staged pipeline built on
//! `mobimetrics-core`.

pub mod config;
pub mod error;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
