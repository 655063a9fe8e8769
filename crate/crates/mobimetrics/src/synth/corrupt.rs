//! Planted bad lines for exercising the loaders.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mobimetrics_core::StudyWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    MalformedJson,
    MissingField,
    LonOutOfRange,
    LatOutOfRange,
    EmptyUserId,
    WhitespaceUserId,
    EmptyPoiId,
    OutsideWindow,
    InvalidUtf8,
    EmptyLine,
    /// Parses, but names a POI missing from the catalog.
    UnknownPoi,
}

impl CorruptionKind {
    pub const POSITIONING: [CorruptionKind; 9] = [
        CorruptionKind::MalformedJson,
        CorruptionKind::MissingField,
        CorruptionKind::LonOutOfRange,
        CorruptionKind::LatOutOfRange,
        CorruptionKind::EmptyUserId,
        CorruptionKind::WhitespaceUserId,
        CorruptionKind::OutsideWindow,
        CorruptionKind::InvalidUtf8,
        CorruptionKind::EmptyLine,
    ];

    pub const QUERIES: [CorruptionKind; 7] = [
        CorruptionKind::MalformedJson,
        CorruptionKind::MissingField,
        CorruptionKind::EmptyUserId,
        CorruptionKind::EmptyPoiId,
        CorruptionKind::OutsideWindow,
        CorruptionKind::InvalidUtf8,
        CorruptionKind::UnknownPoi,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CorruptionKind::MalformedJson => "malformed_json",
            CorruptionKind::MissingField => "missing_field",
            CorruptionKind::LonOutOfRange => "lon_out_of_range",
            CorruptionKind::LatOutOfRange => "lat_out_of_range",
            CorruptionKind::EmptyUserId => "empty_user_id",
            CorruptionKind::WhitespaceUserId => "whitespace_user_id",
            CorruptionKind::EmptyPoiId => "empty_poi_id",
            CorruptionKind::OutsideWindow => "outside_window",
            CorruptionKind::InvalidUtf8 => "invalid_utf8",
            CorruptionKind::EmptyLine => "empty_line",
            CorruptionKind::UnknownPoi => "unknown_poi",
        }
    }

    /// True when the loader itself rejects the line.
    pub fn rejected_at_parse(self) -> bool {
        self != CorruptionKind::UnknownPoi
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Corruption {
    pub file: String,
    /// 1-based line in the emitted file.
    pub line: u64,
    pub kind: CorruptionKind,
}

/// Chooses output line numbers for `count` corrupt lines among
/// `clean + count` total, cycling through `kinds` in a shuffled order.
pub fn plan(rng: &mut ChaCha8Rng, file: &str, clean: usize, count: usize, kinds: &[CorruptionKind]) -> Vec<Corruption> {
    let total = clean + count;
    let mut lines: Vec<usize> = sample(rng, total, count).into_vec();
    lines.sort_unstable();
    lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| Corruption { file: file.to_string(), line: l as u64 + 1, kind: kinds[(i + rng.random_range(0..kinds.len())) % kinds.len()] })
        .collect()
}

pub fn positioning_line(kind: CorruptionKind, rng: &mut ChaCha8Rng, window: &StudyWindow) -> Vec<u8> {
    let t = rng.random_range(window.start..=window.end);
    let u = format!("u{:06}", rng.random_range(0..1_000_000));
    let line = match kind {
        CorruptionKind::MalformedJson => format!(r#"{{"u":"{u}","lon":121.5,"lat":31.2,"t":{t}"#),
        CorruptionKind::MissingField => format!(r#"{{"u":"{u}","lon":121.5,"t":{t}}}"#),
        CorruptionKind::LonOutOfRange => format!(r#"{{"u":"{u}","lon":200.5,"lat":31.2,"t":{t}}}"#),
        CorruptionKind::LatOutOfRange => format!(r#"{{"u":"{u}","lon":121.5,"lat":-95.0,"t":{t}}}"#),
        CorruptionKind::EmptyUserId => format!(r#"{{"u":"","lon":121.5,"lat":31.2,"t":{t}}}"#),
        CorruptionKind::WhitespaceUserId => format!(r#"{{"u":"u 01","lon":121.5,"lat":31.2,"t":{t}}}"#),
        CorruptionKind::OutsideWindow => format!(r#"{{"u":"{u}","lon":121.5,"lat":31.2,"t":{}}}"#, window.start - 30 * 86_400),
        CorruptionKind::InvalidUtf8 => {
            let mut b = br#"{"u":""#.to_vec();
            b.extend_from_slice(b"\xff\xfe");
            b.extend_from_slice(format!(r#"","lon":121.5,"lat":31.2,"t":{t}}}"#).as_bytes());
            return b;
        }
        CorruptionKind::EmptyLine => String::new(),
        CorruptionKind::EmptyPoiId | CorruptionKind::UnknownPoi => unreachable!("query-only corruption"),
    };
    line.into_bytes()
}

pub fn query_line(kind: CorruptionKind, rng: &mut ChaCha8Rng, window: &StudyWindow) -> Vec<u8> {
    let t = rng.random_range(window.start..=window.end);
    let u = format!("u{:06}", rng.random_range(0..1_000_000));
    let line = match kind {
        CorruptionKind::MalformedJson => format!(r#"{{"u":"{u}","poi":"auto_000","t":{t}"#),
        CorruptionKind::MissingField => format!(r#"{{"u":"{u}","t":{t}}}"#),
        CorruptionKind::EmptyUserId => format!(r#"{{"u":"","poi":"auto_000","t":{t}}}"#),
        CorruptionKind::EmptyPoiId => format!(r#"{{"u":"{u}","poi":"","t":{t}}}"#),
        CorruptionKind::OutsideWindow => format!(r#"{{"u":"{u}","poi":"auto_000","t":{}}}"#, window.end + 30 * 86_400),
        CorruptionKind::InvalidUtf8 => {
            let mut b = br#"{"u":""#.to_vec();
            b.extend_from_slice(b"\xc3\x28");
            b.extend_from_slice(format!(r#"","poi":"auto_000","t":{t}}}"#).as_bytes());
            return b;
        }
        CorruptionKind::UnknownPoi => format!(r#"{{"u":"{u}","poi":"ghost_{:04}","t":{t}}}"#, rng.random_range(0..10_000)),
        _ => unreachable!("positioning-only corruption"),
    };
    line.into_bytes()
}
