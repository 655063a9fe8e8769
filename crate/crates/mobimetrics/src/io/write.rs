use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use mobimetrics_core::{MapQueryRecord, PositioningRecord};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(|f| BufWriter::with_capacity(1 << 20, f)).map_err(|e| Error::io(path, e))
}

/// Writes a header row and then each row; fields are quoted only when needed.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| Error::format(path, e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::format(path, e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Shortest representation that round-trips; integers print without `.0`.
pub fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Serialize)]
struct PositioningLine<'a> {
    u: &'a str,
    lon: f64,
    lat: f64,
    t: i64,
}

#[derive(Serialize)]
struct QueryLine<'a> {
    u: &'a str,
    poi: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    kw: Option<&'a str>,
    t: i64,
}

pub fn positioning_line<W: Write + ?Sized>(w: &mut W, user: &str, lon: f64, lat: f64, t: i64) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, &PositioningLine { u: user, lon, lat, t })?;
    w.write_all(b"\n")
}

pub fn query_line<W: Write + ?Sized>(w: &mut W, user: &str, poi: &str, kw: Option<&str>, t: i64) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, &QueryLine { u: user, poi, kw, t })?;
    w.write_all(b"\n")
}

pub fn to_ndjson_positioning(records: &[PositioningRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        positioning_line(&mut out, r.user_id.as_str(), r.point.lon, r.point.lat, r.timestamp).expect("in-memory write");
    }
    out
}

pub fn to_ndjson_queries(records: &[MapQueryRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        query_line(&mut out, r.user_id.as_str(), r.poi_id.as_str(), r.keyword.as_deref(), r.timestamp).expect("in-memory write");
    }
    out
}

/// Lowercase hex SHA-256 of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// `sha256  relative/path` lines for every file under `dir`, sorted by path.
pub fn digest_tree(dir: &Path) -> Result<Vec<(String, String)>> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, String)>) -> Result<()> {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(dir, e))?;
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            let p = e.path();
            if p.is_dir() {
                walk(&p, root, out)?;
            } else {
                let rel = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
                out.push((rel, sha256_file(&p)?));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}
