//! File formats: NDJSON event streams, CSV/JSON catalogs, the box-office
//! panel, and CSV/JSON outputs.

mod read;
mod write;

pub use read::*;
pub use write::*;
