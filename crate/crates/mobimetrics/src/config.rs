//! Flat `key = value` config files.
//!
//! `#` starts a comment, blank lines are ignored, keys are unique. Relative
//! paths resolve against the directory holding the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mobimetrics_core::{Date, MonthId, StudyWindow};
use mobimetrics_core::presence::{WorkHours, DEFAULT_DAY_THRESHOLD};
use mobimetrics_core::spatial::DEFAULT_CELL_SIZE_DEG;
use mobimetrics_core::anomaly::{DEFAULT_CONTROL_QUIET_SHARE, DEFAULT_MIN_RUN, DEFAULT_Z_THRESHOLD};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    base_dir: PathBuf,
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected key = value", i + 1)));
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(key.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self { base_dir: base_dir.to_path_buf(), entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on any key not in `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(Error::Config(format!("unknown key {k}"))),
            None => Ok(()),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("{key} = {v}: {e}"))))
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.parsed(key)?.ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.base_dir.join(v))
    }

    pub fn required_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key).ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    /// `;`-separated list of `/`-separated category paths.
    pub fn category_list(&self, key: &str) -> Vec<Vec<String>> {
        self.get(key)
            .map(|v| {
                v.split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.split('/').map(|p| p.trim().to_string()).collect())
                    .collect()
            })
            .unwrap_or_default()
    }
}

const PIPELINE_KEYS: &[&str] = &[
    "positioning",
    "queries",
    "pois",
    "aois",
    "boxoffice",
    "platform",
    "venue_groups",
    "window_start",
    "window_end",
    "base_year",
    "day_threshold",
    "work_start_hour",
    "work_end_hour",
    "cell_size",
    "report_first",
    "report_last",
    "categories",
    "unnormalized_categories",
    "fit_first",
    "fit_last",
    "forecast_start",
    "train_first",
    "train_last",
    "z_threshold",
    "min_run",
    "control_quiet_share",
    "out",
];

/// Everything a pipeline run needs. Numbers come from the file only.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub positioning: PathBuf,
    pub queries: PathBuf,
    pub pois: PathBuf,
    pub aois: PathBuf,
    pub boxoffice: Option<PathBuf>,
    pub platform: Option<PathBuf>,
    pub venue_groups: Option<PathBuf>,
    /// Inclusive local dates.
    pub window_start: Date,
    pub window_end: Date,
    pub base_year: i32,
    pub day_threshold: u32,
    pub work_hours: WorkHours,
    pub cell_size: f64,
    pub report_first: MonthId,
    pub report_last: MonthId,
    pub categories: Vec<Vec<String>>,
    pub unnormalized_categories: Vec<Vec<String>>,
    pub fit_first: Date,
    pub fit_last: Date,
    pub forecast_start: Option<Date>,
    pub train_first: Option<Date>,
    pub train_last: Option<Date>,
    pub z_threshold: f64,
    pub min_run: usize,
    pub control_quiet_share: f64,
    pub out: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(&KeyValues::load(path)?)
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        kv.check_known(PIPELINE_KEYS)?;
        let window_start: Date = kv.required("window_start")?;
        let window_end: Date = kv.required("window_end")?;
        if window_end < window_start {
            return Err(Error::Config("window_end precedes window_start".into()));
        }
        let work_hours = WorkHours {
            start_hour: kv.parsed_or("work_start_hour", WorkHours::default().start_hour)?,
            end_hour: kv.parsed_or("work_end_hour", WorkHours::default().end_hour)?,
        };
        if work_hours.start_hour >= work_hours.end_hour || work_hours.end_hour > 24 {
            return Err(Error::Config("work hours must satisfy start < end <= 24".into()));
        }
        let report_first = kv.parsed_or("report_first", window_start.month_id().add_months(12))?;
        let report_last = kv.parsed_or("report_last", window_end.month_id())?;
        if report_last < report_first {
            return Err(Error::Config("report_last precedes report_first".into()));
        }
        let cfg = Self {
            positioning: kv.required_path("positioning")?,
            queries: kv.required_path("queries")?,
            pois: kv.required_path("pois")?,
            aois: kv.required_path("aois")?,
            boxoffice: kv.path("boxoffice"),
            platform: kv.path("platform"),
            venue_groups: kv.path("venue_groups"),
            window_start,
            window_end,
            base_year: kv.parsed_or("base_year", 2014)?,
            day_threshold: kv.parsed_or("day_threshold", DEFAULT_DAY_THRESHOLD)?,
            work_hours,
            cell_size: kv.parsed_or("cell_size", DEFAULT_CELL_SIZE_DEG)?,
            report_first,
            report_last,
            categories: kv.category_list("categories"),
            unnormalized_categories: kv.category_list("unnormalized_categories"),
            fit_first: kv.parsed_or("fit_first", window_start)?,
            fit_last: kv.parsed_or("fit_last", window_end)?,
            forecast_start: kv.parsed("forecast_start")?,
            train_first: kv.parsed("train_first")?,
            train_last: kv.parsed("train_last")?,
            z_threshold: kv.parsed_or("z_threshold", DEFAULT_Z_THRESHOLD)?,
            min_run: kv.parsed_or("min_run", DEFAULT_MIN_RUN)?,
            control_quiet_share: kv.parsed_or("control_quiet_share", DEFAULT_CONTROL_QUIET_SHARE)?,
            out: kv.path("out").unwrap_or_else(|| kv.base_dir().join("out")),
        };
        if cfg.day_threshold < 1 {
            return Err(Error::Config("day_threshold must be at least 1".into()));
        }
        Ok(cfg)
    }

    /// Timestamps covered by the window dates.
    pub fn study_window(&self) -> StudyWindow {
        StudyWindow::from_dates(self.window_start, self.window_end)
    }

    /// All listed categories, unnormalized ones last.
    pub fn all_categories(&self) -> impl Iterator<Item = (&[String], bool)> {
        self.categories
            .iter()
            .map(|c| (c.as_slice(), true))
            .chain(self.unnormalized_categories.iter().map(|c| (c.as_slice(), false)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_paths() {
        let kv = KeyValues::parse("a = 1 # one\n\n# skip\nb=x/y\n", Path::new("/cfg")).unwrap();
        assert_eq!(kv.get("a"), Some("1"));
        assert_eq!(kv.path("b").unwrap(), PathBuf::from("/cfg/x/y"));
        assert_eq!(kv.parsed::<u32>("a").unwrap(), Some(1));
        assert!(kv.parsed::<u32>("b").is_err());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KeyValues::parse("novalue\n", Path::new(".")).is_err());
        assert!(KeyValues::parse("a=1\na=2\n", Path::new(".")).is_err());
        let kv = KeyValues::parse("zzz = 1", Path::new(".")).unwrap();
        assert!(kv.check_known(&["a"]).is_err());
    }

    #[test]
    fn category_lists() {
        let kv = KeyValues::parse("c = Food/Restaurant; Automobile / Car Dealer;", Path::new(".")).unwrap();
        assert_eq!(
            kv.category_list("c"),
            vec![vec!["Food".to_string(), "Restaurant".into()], vec!["Automobile".into(), "Car Dealer".into()]]
        );
    }

    #[test]
    fn pipeline_defaults() {
        let text = "positioning=p\nqueries=q\npois=c.csv\naois=a.json\nwindow_start=2013-01-01\nwindow_end=2016-06-30\n";
        let cfg = PipelineConfig::from_kv(&KeyValues::parse(text, Path::new("/d")).unwrap()).unwrap();
        assert_eq!(cfg.report_first, "2014-01".parse().unwrap());
        assert_eq!(cfg.report_last, "2016-06".parse().unwrap());
        assert_eq!(cfg.day_threshold, 10);
        assert_eq!(cfg.out, PathBuf::from("/d/out"));
    }
}
