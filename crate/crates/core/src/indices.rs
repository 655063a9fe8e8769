//! Base-100 monthly indices and year-over-year growth.
//!
//! Values are `100 * count / mean(base-year counts)`. YoY compares a month to
//! the same month one year earlier, except that January and February are
//! summed and compared as one period to absorb the moving Spring Festival.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::calendar::{local_date, Date, MonthId};
use crate::error::{Error, Result};
use crate::model::{AoiCatalog, AoiId, AoiKind, MapQueryRecord, PoiCatalog, RejectLog};

/// A YoY comparison period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum YoyPeriod {
    /// January and February of the given year, merged.
    JanFeb(i32),
    /// A single month from March to December.
    Month(MonthId),
}

impl YoyPeriod {
    /// The period a month's YoY is reported under.
    pub fn of(m: MonthId) -> Self {
        if m.month() <= 2 {
            YoyPeriod::JanFeb(m.year())
        } else {
            YoyPeriod::Month(m)
        }
    }

    pub fn months(self) -> Vec<MonthId> {
        match self {
            YoyPeriod::JanFeb(y) => alloc::vec![MonthId::new(y, 1).unwrap(), MonthId::new(y, 2).unwrap()],
            YoyPeriod::Month(m) => alloc::vec![m],
        }
    }

    pub fn year_earlier(self) -> Self {
        match self {
            YoyPeriod::JanFeb(y) => YoyPeriod::JanFeb(y - 1),
            YoyPeriod::Month(m) => YoyPeriod::Month(m.add_months(-12)),
        }
    }

    fn key(self) -> (i32, u8) {
        match self {
            YoyPeriod::JanFeb(y) => (y, 1),
            YoyPeriod::Month(m) => (m.year(), m.month()),
        }
    }
}

impl Ord for YoyPeriod {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for YoyPeriod {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for YoyPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoyPeriod::JanFeb(y) => write!(f, "{y}-01+02"),
            YoyPeriod::Month(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    pub label: String,
    pub base_year: i32,
    /// False for series emitted as raw counts; `values` then equals `monthly`.
    pub normalized: bool,
    pub monthly: BTreeMap<MonthId, f64>,
    pub values: BTreeMap<MonthId, f64>,
    /// Every period whose prior-year data is present with a non-zero total.
    pub yoy: BTreeMap<YoyPeriod, f64>,
}

impl IndexSeries {
    /// YoY reported for month `m` (the merged value for January and February).
    pub fn yoy_for_month(&self, m: MonthId) -> Option<f64> {
        self.yoy.get(&YoyPeriod::of(m)).copied()
    }

    /// A series of raw counts with no base-year scaling.
    pub fn unnormalized(counts: &BTreeMap<MonthId, f64>, base_year: i32, label: &str) -> Result<Self> {
        check_counts(counts)?;
        let mut s = Self {
            label: label.to_string(),
            base_year,
            normalized: false,
            monthly: counts.clone(),
            values: counts.clone(),
            yoy: BTreeMap::new(),
        };
        s.yoy = all_yoy(&s.monthly);
        Ok(s)
    }
}

fn check_counts(counts: &BTreeMap<MonthId, f64>) -> Result<()> {
    match counts.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        Some((m, _)) => Err(Error::MissingPeriod(alloc::format!("{m} (invalid count)"))),
        None => Ok(()),
    }
}

/// Normalizes monthly counts so the base-year mean is 100.
pub fn build_index(counts: &BTreeMap<MonthId, f64>, base_year: i32, label: &str) -> Result<IndexSeries> {
    check_counts(counts)?;
    let base: Vec<MonthId> = (1..=12).map(|m| MonthId::new(base_year, m).unwrap()).collect();
    let missing: Vec<MonthId> = base.iter().copied().filter(|m| !counts.contains_key(m)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingBaseMonths { year: base_year, missing });
    }
    let mean = base.iter().map(|m| counts[m]).sum::<f64>() / 12.0;
    if !(mean > 0.0) {
        return Err(Error::ZeroBaseMean(base_year));
    }
    Ok(IndexSeries {
        label: label.to_string(),
        base_year,
        normalized: true,
        monthly: counts.clone(),
        values: counts.iter().map(|(m, c)| (*m, 100.0 * c / mean)).collect(),
        yoy: all_yoy(counts),
    })
}

fn period_total(counts: &BTreeMap<MonthId, f64>, p: YoyPeriod) -> Option<f64> {
    p.months().iter().map(|m| counts.get(m).copied()).sum()
}

fn all_yoy(counts: &BTreeMap<MonthId, f64>) -> BTreeMap<YoyPeriod, f64> {
    let periods: BTreeSet<YoyPeriod> = counts.keys().map(|m| YoyPeriod::of(*m)).collect();
    periods.into_iter().filter_map(|p| yoy_from_counts(counts, p).ok().map(|g| (p, g))).collect()
}

fn yoy_from_counts(counts: &BTreeMap<MonthId, f64>, period: YoyPeriod) -> Result<f64> {
    let now = period_total(counts, period).ok_or_else(|| Error::MissingPeriod(period.to_string()))?;
    let prior = period.year_earlier();
    let then = period_total(counts, prior).ok_or_else(|| Error::MissingPeriod(prior.to_string()))?;
    if then == 0.0 {
        return Err(Error::ZeroDenominator(prior.to_string()));
    }
    Ok(100.0 * (now - then) / then)
}

/// Percent change of `period` against the same period a year earlier,
/// computed from the raw counts.
pub fn yoy_growth(series: &IndexSeries, period: YoyPeriod) -> Result<f64> {
    yoy_from_counts(&series.monthly, period)
}

/// Employment indices for all industrial parks and for each industrial kind.
#[derive(Debug, Clone, PartialEq)]
pub struct EmploymentIndices {
    pub all: IndexSeries,
    pub traditional: IndexSeries,
    pub high_tech: IndexSeries,
}

/// Sums per-AOI monthly counts over the AOIs whose kind passes `keep`.
pub fn group_counts(
    counts: &BTreeMap<AoiId, BTreeMap<MonthId, u64>>,
    catalog: &AoiCatalog,
    keep: impl Fn(AoiKind) -> bool,
) -> Result<BTreeMap<MonthId, f64>> {
    let mut out = BTreeMap::new();
    for (aoi, months) in counts {
        let kind = catalog.get(aoi.as_str()).ok_or_else(|| Error::UnknownAoi(aoi.to_string()))?.kind;
        if keep(kind) {
            for (m, c) in months {
                *out.entry(*m).or_insert(0.0) += *c as f64;
            }
        }
    }
    Ok(out)
}

pub fn employment_index(
    counts: &BTreeMap<AoiId, BTreeMap<MonthId, u64>>,
    catalog: &AoiCatalog,
    base_year: i32,
) -> Result<EmploymentIndices> {
    let all = group_counts(counts, catalog, AoiKind::is_industrial)?;
    let trad = group_counts(counts, catalog, |k| k == AoiKind::IndustrialTraditional)?;
    let high = group_counts(counts, catalog, |k| k == AoiKind::IndustrialHighTech)?;
    Ok(EmploymentIndices {
        all: build_index(&all, base_year, "employment_all")?,
        traditional: build_index(&trad, base_year, "employment_traditional")?,
        high_tech: build_index(&high, base_year, "employment_high_tech")?,
    })
}

pub fn consumer_index(
    counts: &BTreeMap<AoiId, BTreeMap<MonthId, u64>>,
    catalog: &AoiCatalog,
    base_year: i32,
) -> Result<IndexSeries> {
    let total = group_counts(counts, catalog, |k| k == AoiKind::Commercial)?;
    build_index(&total, base_year, "consumer")
}

/// Monthly counts of distinct (user, POI, local day) query events whose POI
/// lies under `prefix`, zero-filled over `first..=last`. Queries naming an
/// unknown POI are logged to `rejects` with their 1-based stream position.
pub fn category_counts<'a, I, S>(
    queries: I,
    catalog: &PoiCatalog,
    prefix: &[S],
    first: MonthId,
    last: MonthId,
    rejects: &mut RejectLog,
) -> Result<BTreeMap<MonthId, f64>>
where
    I: IntoIterator<Item = &'a MapQueryRecord>,
    S: AsRef<str>,
{
    if !catalog.iter().any(|p| p.in_category(prefix)) {
        let path: Vec<&str> = prefix.iter().map(AsRef::as_ref).collect();
        return Err(Error::UnknownCategory(path.join("/")));
    }
    let mut seen: BTreeSet<(&str, &str, Date)> = BTreeSet::new();
    let mut counts: BTreeMap<MonthId, f64> = first.through(last).map(|m| (m, 0.0)).collect();
    for (i, q) in queries.into_iter().enumerate() {
        let Some(poi) = catalog.get(q.poi_id.as_str()) else {
            rejects.push(i as u64 + 1, alloc::format!("unknown poi_id {}", q.poi_id));
            continue;
        };
        if !poi.in_category(prefix) {
            continue;
        }
        let day = local_date(q.timestamp);
        let Some(c) = counts.get_mut(&day.month_id()) else {
            continue;
        };
        if seen.insert((q.user_id.as_str(), q.poi_id.as_str(), day)) {
            *c += 1.0;
        }
    }
    Ok(counts)
}

/// Category query counts as a base-100 index.
#[allow(clippy::too_many_arguments)]
pub fn consumption_trends<'a, I, S>(
    queries: I,
    catalog: &PoiCatalog,
    prefix: &[S],
    first: MonthId,
    last: MonthId,
    base_year: i32,
    rejects: &mut RejectLog,
) -> Result<IndexSeries>
where
    I: IntoIterator<Item = &'a MapQueryRecord>,
    S: AsRef<str>,
{
    let counts = category_counts(queries, catalog, prefix, first, last, rejects)?;
    let path: Vec<&str> = prefix.iter().map(AsRef::as_ref).collect();
    build_index(&counts, base_year, &path.join("/"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::StudyWindow;
    use crate::model::Poi;
    use alloc::vec;

    fn m(y: i32, mo: u8) -> MonthId {
        MonthId::new(y, mo).unwrap()
    }

    fn flat(first: MonthId, last: MonthId, v: f64) -> BTreeMap<MonthId, f64> {
        first.through(last).map(|x| (x, v)).collect()
    }

    #[test]
    fn constant_counts_are_flat_100() {
        let s = build_index(&flat(m(2014, 1), m(2015, 12), 500.0), 2014, "c").unwrap();
        assert!(s.values.values().all(|v| (*v - 100.0).abs() < 1e-12));
        assert!(s.yoy.values().all(|g| *g == 0.0));
        assert_eq!(s.yoy.len(), 11);
    }

    #[test]
    fn value_by_definition() {
        let mut c = flat(m(2014, 1), m(2014, 12), 200.0);
        c.insert(m(2015, 1), 220.0);
        let s = build_index(&c, 2014, "x").unwrap();
        assert!((s.values[&m(2015, 1)] - 110.0).abs() < 1e-12);
    }

    #[test]
    fn missing_base_months_are_named() {
        let mut c = flat(m(2014, 1), m(2014, 12), 1.0);
        c.remove(&m(2014, 3));
        c.remove(&m(2014, 7));
        let err = build_index(&c, 2014, "x").unwrap_err();
        assert_eq!(err, Error::MissingBaseMonths { year: 2014, missing: vec![m(2014, 3), m(2014, 7)] });
        assert!(err.to_string().contains("2014-03"));
        let zero = flat(m(2014, 1), m(2014, 12), 0.0);
        assert_eq!(build_index(&zero, 2014, "x").unwrap_err(), Error::ZeroBaseMean(2014));
    }

    #[test]
    fn merged_jan_feb() {
        let mut c = flat(m(2014, 1), m(2014, 12), 100.0);
        c.insert(m(2015, 1), 100.0);
        c.insert(m(2015, 2), 100.0);
        c.insert(m(2016, 1), 90.0);
        c.insert(m(2016, 2), 110.0);
        c.insert(m(2015, 5), 100.0);
        c.insert(m(2016, 5), 97.0);
        let s = build_index(&c, 2014, "x").unwrap();
        assert_eq!(yoy_growth(&s, YoyPeriod::JanFeb(2016)).unwrap(), 0.0);
        assert!((yoy_growth(&s, YoyPeriod::Month(m(2016, 5))).unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(s.yoy_for_month(m(2016, 2)), Some(0.0));
        assert!(matches!(yoy_growth(&s, YoyPeriod::Month(m(2016, 6))), Err(Error::MissingPeriod(_))));
    }

    #[test]
    fn zero_denominator() {
        let mut c = flat(m(2014, 1), m(2014, 12), 1.0);
        c.insert(m(2013, 6), 0.0);
        let s = build_index(&c, 2014, "x").unwrap();
        assert_eq!(yoy_growth(&s, YoyPeriod::Month(m(2014, 6))).unwrap_err(), Error::ZeroDenominator("2013-06".into()));
        assert!(!s.yoy.contains_key(&YoyPeriod::Month(m(2014, 6))));
    }

    #[test]
    fn period_order() {
        let mut ps = vec![YoyPeriod::Month(m(2015, 3)), YoyPeriod::JanFeb(2016), YoyPeriod::JanFeb(2015)];
        ps.sort();
        assert_eq!(ps, [YoyPeriod::JanFeb(2015), YoyPeriod::Month(m(2015, 3)), YoyPeriod::JanFeb(2016)]);
    }

    fn catalog() -> PoiCatalog {
        let path = |s: &str| s.split('/').map(String::from).collect::<Vec<_>>();
        PoiCatalog::new(vec![
            Poi::new("r1", "Noodles", 121.0, 31.0, path("Food/Restaurant")).unwrap(),
            Poi::new("c1", "Motors", 121.1, 31.0, path("Automobile/Car Dealer")).unwrap(),
        ])
        .unwrap()
    }

    fn q(user: &str, poi: &str, ts: i64) -> MapQueryRecord {
        MapQueryRecord::new(user, poi, None, ts, &StudyWindow::new(i64::MIN, i64::MAX)).unwrap()
    }

    #[test]
    fn category_dedup_and_rejects() {
        let noon = m(2015, 3).first_day().local_midnight() + 12 * 3600;
        let mut qs = vec![q("a", "r1", noon), q("b", "r1", noon), q("c", "r1", noon)];
        for i in 0..5 {
            qs.push(q("d", "r1", noon + i * 60));
        }
        qs.push(q("d", "r1", noon + 86_400));
        qs.push(q("a", "c1", noon));
        qs.push(q("a", "nope", noon));
        let mut rejects = RejectLog::new();
        let counts = category_counts(&qs, &catalog(), &["Food"], m(2015, 3), m(2015, 4), &mut rejects).unwrap();
        assert_eq!(counts[&m(2015, 3)], 5.0);
        assert_eq!(counts[&m(2015, 4)], 0.0);
        assert_eq!(rejects.len(), 1);
        assert_eq!(rejects.entries()[0].line, 11);
        let err = category_counts(&qs, &catalog(), &["Finance"], m(2015, 3), m(2015, 3), &mut rejects).unwrap_err();
        assert_eq!(err, Error::UnknownCategory("Finance".into()));
    }
}
