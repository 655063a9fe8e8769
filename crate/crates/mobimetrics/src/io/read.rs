//! Validating loaders. Event streams never fail on bad lines: each line
//! becomes a record or a reject. Catalog problems abort the load.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::Path;

use mobimetrics_core::econometrics::DailySeries;
use mobimetrics_core::{
    Aoi, AoiCatalog, AoiKind, Date, GeoPoint, MapQueryRecord, Poi, PoiCatalog, PositioningRecord, RejectLog, StudyWindow,
};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Context, Error, Result};

/// Lines per parallel parse batch.
const BATCH: usize = 1 << 15;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub rejects: RejectLog,
    pub lines: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPositioning<'a> {
    #[serde(borrow)]
    u: Cow<'a, str>,
    lon: f64,
    lat: f64,
    t: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery<'a> {
    #[serde(borrow)]
    u: Cow<'a, str>,
    #[serde(borrow)]
    poi: Cow<'a, str>,
    #[serde(borrow, default)]
    kw: Option<Cow<'a, str>>,
    t: i64,
}

/// Splits on `\n`, dropping one trailing `\r` per line. A final newline does
/// not start another line.
pub fn split_lines(bytes: &[u8]) -> Vec<&[u8]> {
    let mut lines: Vec<&[u8]> = bytes.split(|b| *b == b'\n').collect();
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        lines.pop();
    }
    for l in &mut lines {
        if let Some(stripped) = l.strip_suffix(b"\r") {
            *l = stripped;
        }
    }
    lines
}

fn parse_lines<T, F>(bytes: &[u8], parse: F) -> Loaded<T>
where
    T: Send,
    F: Fn(&[u8]) -> std::result::Result<T, String> + Sync,
{
    let lines = split_lines(bytes);
    let parsed: Vec<std::result::Result<T, String>> = lines
        .par_chunks(BATCH)
        .flat_map_iter(|chunk| chunk.iter().map(|l| parse(l)).collect::<Vec<_>>())
        .collect();
    let mut out = Loaded { records: Vec::with_capacity(parsed.len()), rejects: RejectLog::new(), lines: lines.len() as u64 };
    for (i, p) in parsed.into_iter().enumerate() {
        match p {
            Ok(r) => out.records.push(r),
            Err(reason) => out.rejects.push(i as u64 + 1, reason),
        }
    }
    out
}

fn json_line<'a, T: Deserialize<'a>>(line: &'a [u8]) -> std::result::Result<T, String> {
    if line.iter().all(u8::is_ascii_whitespace) {
        return Err("empty line".into());
    }
    let text = std::str::from_utf8(line).map_err(|_| "invalid utf-8".to_string())?;
    serde_json::from_str(text).map_err(|e| format!("malformed json: {e}"))
}

pub fn parse_positioning_line(line: &[u8], window: &StudyWindow) -> std::result::Result<PositioningRecord, String> {
    let raw: RawPositioning = json_line(line)?;
    PositioningRecord::new(&raw.u, raw.lon, raw.lat, raw.t, window).map_err(|e| e.to_string())
}

pub fn parse_query_line(line: &[u8], window: &StudyWindow) -> std::result::Result<MapQueryRecord, String> {
    let raw: RawQuery = json_line(line)?;
    MapQueryRecord::new(&raw.u, &raw.poi, raw.kw.as_deref(), raw.t, window).map_err(|e| e.to_string())
}

pub fn parse_positioning(bytes: &[u8], window: &StudyWindow) -> Loaded<PositioningRecord> {
    parse_lines(bytes, |l| parse_positioning_line(l, window))
}

pub fn parse_queries(bytes: &[u8], window: &StudyWindow) -> Loaded<MapQueryRecord> {
    parse_lines(bytes, |l| parse_query_line(l, window))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_positioning(path: &Path, window: &StudyWindow) -> Result<Loaded<PositioningRecord>> {
    Ok(parse_positioning(&read(path)?, window))
}

pub fn load_queries(path: &Path, window: &StudyWindow) -> Result<Loaded<MapQueryRecord>> {
    Ok(parse_queries(&read(path)?, window))
}

fn csv_reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(bytes)
}

fn check_header(path: &Path, rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::format(path, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

pub fn parse_pois(path: &Path, bytes: &[u8]) -> Result<PoiCatalog> {
    let mut rdr = csv_reader(bytes);
    check_header(path, &mut rdr, &["poi_id", "name", "lon", "lat", "category_path"])?;
    let mut pois = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::format(path, format!("line {line}: {e}")))?;
        let num = |j: usize| {
            row[j].trim().parse::<f64>().map_err(|_| Error::format(path, format!("line {line}: bad number {:?}", &row[j])))
        };
        let (lon, lat) = (num(2)?, num(3)?);
        let categories = row[4].split('/').map(|s| s.trim().to_string()).collect();
        let poi = Poi::new(&row[0], &row[1], lon, lat, categories).context(format!("{} line {line}", path.display()))?;
        pois.push(poi);
    }
    PoiCatalog::new(pois).context(path.display().to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAoi {
    aoi_id: String,
    name: String,
    kind: String,
    polygon: Vec<[f64; 2]>,
}

pub fn parse_aois(path: &Path, bytes: &[u8]) -> Result<AoiCatalog> {
    let raw: Vec<RawAoi> = serde_json::from_slice(bytes).map_err(|e| Error::format(path, e.to_string()))?;
    let ctx = || path.display().to_string();
    let mut aois = Vec::with_capacity(raw.len());
    for a in raw {
        let kind = AoiKind::from_label(&a.kind).context(ctx())?;
        let mut vertices = Vec::with_capacity(a.polygon.len());
        for [lon, lat] in a.polygon {
            let p = GeoPoint::new(lon, lat).map_err(|e| Error::format(path, format!("aoi {}: {e}", a.aoi_id)))?;
            vertices.push(p);
        }
        aois.push(Aoi::new(&a.aoi_id, &a.name, kind, vertices).context(ctx())?);
    }
    AoiCatalog::new(aois).context(ctx())
}

pub fn load_catalog(poi_path: &Path, aoi_path: &Path) -> Result<(PoiCatalog, AoiCatalog)> {
    Ok((parse_pois(poi_path, &read(poi_path)?)?, parse_aois(aoi_path, &read(aoi_path)?)?))
}

/// Daily per-venue revenue and query counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxOfficePanel {
    pub revenue: BTreeMap<String, DailySeries>,
    pub queries: BTreeMap<String, DailySeries>,
}

impl BoxOfficePanel {
    pub fn venues(&self) -> impl Iterator<Item = &str> {
        self.revenue.keys().map(String::as_str)
    }
}

fn parse_date(path: &Path, line: usize, s: &str) -> Result<Date> {
    s.trim().parse().map_err(|_| Error::format(path, format!("line {line}: bad date {s:?}")))
}

fn parse_num(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::format(path, format!("line {line}: bad number {s:?}")))
}

fn series_map(path: &Path, maps: BTreeMap<String, BTreeMap<Date, f64>>) -> Result<BTreeMap<String, DailySeries>> {
    maps.into_iter()
        .map(|(k, m)| Ok((k.clone(), DailySeries::from_map(&m).context(format!("{} venue {k}", path.display()))?)))
        .collect()
}

pub fn parse_boxoffice(path: &Path, bytes: &[u8]) -> Result<BoxOfficePanel> {
    let mut rdr = csv_reader(bytes);
    check_header(path, &mut rdr, &["date", "venue_id", "revenue", "queries"])?;
    let mut rev: BTreeMap<String, BTreeMap<Date, f64>> = BTreeMap::new();
    let mut qs: BTreeMap<String, BTreeMap<Date, f64>> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::format(path, format!("line {line}: {e}")))?;
        let date = parse_date(path, line, &row[0])?;
        let venue = row[1].to_string();
        if rev.entry(venue.clone()).or_default().insert(date, parse_num(path, line, &row[2])?).is_some() {
            return Err(Error::format(path, format!("line {line}: duplicate ({}, {venue})", &row[0])));
        }
        qs.entry(venue).or_default().insert(date, parse_num(path, line, &row[3])?);
    }
    Ok(BoxOfficePanel { revenue: series_map(path, rev)?, queries: series_map(path, qs)? })
}

pub fn load_boxoffice(path: &Path) -> Result<BoxOfficePanel> {
    parse_boxoffice(path, &read(path)?)
}

/// Platform-wide daily query totals.
pub fn load_platform(path: &Path) -> Result<DailySeries> {
    let bytes = read(path)?;
    let mut rdr = csv_reader(&bytes);
    check_header(path, &mut rdr, &["date", "total"])?;
    let mut m = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::format(path, format!("line {line}: {e}")))?;
        m.insert(parse_date(path, line, &row[0])?, parse_num(path, line, &row[1])?);
    }
    DailySeries::from_map(&m).context(path.display().to_string())
}

/// Venue id -> group label.
pub fn load_venue_groups(path: &Path) -> Result<BTreeMap<String, String>> {
    let bytes = read(path)?;
    let mut rdr = csv_reader(&bytes);
    check_header(path, &mut rdr, &["venue_id", "group"])?;
    let mut out = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::format(path, format!("line {}: {e}", i + 2)))?;
        out.insert(row[0].to_string(), row[1].to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> StudyWindow {
        StudyWindow::new(1_400_000_000, 1_500_000_000)
    }

    #[test]
    fn positioning_examples() {
        let ok = parse_positioning_line(br#"{"u":"a1","lon":121.5,"lat":31.2,"t":1420070400}"#, &window()).unwrap();
        assert_eq!(ok.user_id.as_str(), "a1");
        let bad = parse_positioning_line(br#"{"u":"a1","lon":200.0,"lat":31.2,"t":1420070400}"#, &window());
        assert_eq!(bad.unwrap_err(), "lon out of range");
        assert_eq!(parse_positioning_line(b"\xff\xfe", &window()).unwrap_err(), "invalid utf-8");
        assert!(parse_positioning_line(br#"{"u":"a1","lon":1,"lat":1,"t":1}"#, &window()).unwrap_err().contains("outside"));
    }

    #[test]
    fn query_examples() {
        let q = parse_query_line(br#"{"u":"a1","poi":"p9","t":1420070400}"#, &window()).unwrap();
        assert_eq!(q.keyword, None);
        let e = parse_query_line(br#"{"u":"","poi":"p9","t":1420070400}"#, &window()).unwrap_err();
        assert_eq!(e, "empty user_id");
    }

    #[test]
    fn every_line_is_record_or_reject() {
        let text = b"{\"u\":\"a\",\"lon\":1,\"lat\":1,\"t\":1420070400}\r\n\n{bad\n{\"u\":\"b\",\"lon\":1,\"lat\":1,\"t\":1420070400}";
        let l = parse_positioning(text, &window());
        assert_eq!(l.lines, 4);
        assert_eq!(l.records.len(), 2);
        let lines: Vec<u64> = l.rejects.entries().iter().map(|r| r.line).collect();
        assert_eq!(lines, [2, 3]);
    }

    #[test]
    fn catalogs() {
        let p = Path::new("pois.csv");
        let csv = "poi_id,name,lon,lat,category_path\np1,A,121,31,Food/Restaurant\np2,B,121,31,Shopping\np3,C,121,31,Auto\n";
        assert_eq!(parse_pois(p, csv.as_bytes()).unwrap().len(), 3);
        let dup = "poi_id,name,lon,lat,category_path\np1,A,121,31,Food\np1,B,121,31,Food\n";
        assert!(parse_pois(p, dup.as_bytes()).unwrap_err().to_string().contains("duplicate"));
        let a = Path::new("aois.json");
        let two = r#"[{"aoi_id":"x","name":"X","kind":"Commercial","polygon":[[0,0],[1,0]]}]"#;
        assert!(parse_aois(a, two.as_bytes()).unwrap_err().to_string().contains("polygon has < 3 vertices"));
        let bow = r#"[{"aoi_id":"x","name":"X","kind":"Commercial","polygon":[[0,0],[1,1],[1,0],[0,1]]}]"#;
        assert!(parse_aois(a, bow.as_bytes()).unwrap_err().to_string().contains("polygon self-intersects"));
        let kind = r#"[{"aoi_id":"x","name":"X","kind":"Farm","polygon":[[0,0],[1,0],[1,1]]}]"#;
        assert!(parse_aois(a, kind.as_bytes()).is_err());
    }
}
