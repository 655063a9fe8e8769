//! Core algorithms for measuring economic activity from mobility traces and
//! map-query logs.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem (NDJSON/CSV loaders, the synthetic world generator, the CLI)
//! lives in the `mobimetrics` companion crate.
//!
//! Pipeline stages, bottom up:
//!
//! - [`calendar`]: fixed UTC+8 civil calendar, [`MonthId`] and [`Date`].
//! - [`geo`] and [`model`]: validated records and the POI/AOI catalogs.
//! - [`spatial`]: point-in-polygon and the uniform-grid [`AoiIndex`].
//! - [`cohort`]: 13-month continuous-user sampling.
//! - [`presence`]: per user/AOI/month day counts and employee/consumer rules.
//! - [`footfall`]: daily distinct-visitor and query-volume series.
//! - [`indices`]: base-year-100 indices and year-over-year growth.
//! - [`econometrics`]: OLS, seasonal AR designs, rolling nowcasts, Pearson.
//! - [`anomaly`]: forecast-residual fraud detection against a control group.
#![no_std]

extern crate alloc;

pub mod anomaly;
pub mod calendar;
pub mod cohort;
pub mod econometrics;
pub mod error;
pub mod footfall;
pub mod geo;
pub mod indices;
pub mod model;
pub mod presence;
pub mod spatial;

pub use calendar::{Date, MonthId, StudyWindow, Timestamp};
pub use error::{Error, Result};
pub use geo::{BBox, GeoPoint, Polygon};
pub use model::{Aoi, AoiCatalog, AoiId, AoiKind, MapQueryRecord, Poi, PoiCatalog, PoiId, PositioningRecord, RejectLog, UserId};
pub use spatial::AoiIndex;
