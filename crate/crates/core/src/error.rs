use alloc::string::String;
use alloc::vec::Vec;

use crate::calendar::{Date, MonthId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lon out of range")]
    LonOutOfRange,
    #[error("lat out of range")]
    LatOutOfRange,
    #[error("non-finite coordinate")]
    NonFiniteCoordinate,
    #[error("empty user_id")]
    EmptyUserId,
    #[error("user_id contains whitespace")]
    WhitespaceUserId,
    #[error("empty poi_id")]
    EmptyPoiId,
    #[error("timestamp {0} outside study window")]
    OutsideWindow(i64),

    #[error("aoi {aoi}: polygon has < 3 vertices")]
    TooFewVertices { aoi: String },
    #[error("aoi {aoi}: polygon self-intersects")]
    SelfIntersecting { aoi: String },
    #[error("aoi {aoi}: polygon has zero area")]
    ZeroArea { aoi: String },
    #[error("aoi {aoi}: polygon crosses the antimeridian")]
    CrossesAntimeridian { aoi: String },
    #[error("aoi {aoi}: invalid vertex ({reason})")]
    InvalidVertex { aoi: String, reason: &'static str },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown aoi kind {0:?}")]
    UnknownKind(String),
    #[error("poi {0}: empty category path")]
    EmptyCategory(String),
    #[error("cell size must be positive")]
    InvalidCellSize,

    #[error("insufficient history: {month} needs 12 prior months inside the data window")]
    InsufficientHistory { month: MonthId },
    #[error("day threshold must be at least 1")]
    InvalidThreshold,
    #[error("unknown aoi {0}")]
    UnknownAoi(String),
    #[error("kind mismatch: aoi {0} is not commercial")]
    KindMismatch(String),

    #[error("base year {year} missing months: {}", fmt_months(missing))]
    MissingBaseMonths { year: i32, missing: Vec<MonthId> },
    #[error("base year {0} has zero mean")]
    ZeroBaseMean(i32),
    #[error("missing data for {0}")]
    MissingPeriod(String),
    #[error("zero denominator for {0}")]
    ZeroDenominator(String),
    #[error("unknown category {0}")]
    UnknownCategory(String),

    #[error("series are not aligned on dates")]
    Misaligned,
    #[error("series too short: need {need}, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("invalid series value on {date}: {reason}")]
    InvalidSeriesValue { date: Date, reason: &'static str },
    #[error("regressor matrix shape mismatch")]
    ShapeMismatch,
    #[error("rank deficient: column {column} is collinear with earlier columns")]
    RankDeficient { column: String },
    #[error("empty input")]
    EmptyInput,
    #[error("zero variance")]
    ZeroVariance,
    #[error("insufficient training data: need {need} observations, got {got}")]
    InsufficientTraining { need: usize, got: usize },
    #[error("zero platform query volume on {0}")]
    ZeroPlatformVolume(Date),

    #[error("empty venue set")]
    EmptyVenueSet,
    #[error("unknown venue {0}")]
    UnknownVenue(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

fn fmt_months(months: &[MonthId]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, m) in months.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{m}");
    }
    out
}
