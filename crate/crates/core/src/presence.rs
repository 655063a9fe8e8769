//! Per user/AOI/month presence statistics and the employee/consumer rules.
//!
//! Employee: at least `K` distinct weekdays with a point inside the AOI
//! during work hours. Consumer (commercial AOIs only): any presence, minus
//! anyone meeting the employee rule. Days are local UTC+8 calendar days, so
//! repeated points on one day count once.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::calendar::{local_date, local_second_of_day, MonthId};
use crate::cohort::CohortMembership;
use crate::error::{Error, Result};
use crate::model::{AoiCatalog, AoiId, AoiKind, PositioningRecord, UserId};
use crate::spatial::AoiIndex;

pub const DEFAULT_DAY_THRESHOLD: u32 = 10;

/// Local work hours, `[start_hour, end_hour)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkHours {
    pub start_hour: u8,
    pub end_hour: u8,
}

impl Default for WorkHours {
    fn default() -> Self {
        Self { start_hour: 9, end_hour: 18 }
    }
}

impl WorkHours {
    pub fn contains_second(&self, second_of_day: u32) -> bool {
        let h = second_of_day / 3600;
        h >= self.start_hour as u32 && h < self.end_hour as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PresenceStats {
    pub active_days: u8,
    pub workhour_weekdays: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct DayMasks {
    active: u32,
    workhour_weekdays: u32,
}

impl DayMasks {
    fn stats(self) -> PresenceStats {
        PresenceStats {
            active_days: self.active.count_ones() as u8,
            workhour_weekdays: self.workhour_weekdays.count_ones() as u8,
        }
    }
}

type Cells<V> = BTreeMap<UserId, BTreeMap<(u32, MonthId), V>>;

/// Accumulates presence for one shard of records. Shards merge by bitwise
/// union, so the result does not depend on how records were split.
pub struct PresenceBuilder<'a, C: ?Sized> {
    index: &'a AoiIndex,
    cohort: &'a C,
    months: (MonthId, MonthId),
    hours: WorkHours,
    cells: Cells<DayMasks>,
    hits: Vec<u32>,
}

impl<'a, C: CohortMembership + ?Sized> PresenceBuilder<'a, C> {
    pub fn new(index: &'a AoiIndex, cohort: &'a C, first: MonthId, last: MonthId, hours: WorkHours) -> Self {
        Self { index, cohort, months: (first, last), hours, cells: BTreeMap::new(), hits: Vec::new() }
    }

    pub fn add(&mut self, r: &PositioningRecord) {
        let date = local_date(r.timestamp);
        let month = date.month_id();
        if month < self.months.0 || month > self.months.1 {
            return;
        }
        self.hits.clear();
        self.index.assign_into(r.point, &mut self.hits);
        if self.hits.is_empty() || !self.cohort.is_member(r.user_id.as_str(), month) {
            return;
        }
        let bit = 1u32 << (date.day_of_month() - 1);
        let work = date.is_weekday() && self.hours.contains_second(local_second_of_day(r.timestamp));
        let per_user = match self.cells.get_mut(r.user_id.as_str()) {
            Some(m) => m,
            None => self.cells.entry(r.user_id.clone()).or_default(),
        };
        for &pos in &self.hits {
            let masks = per_user.entry((pos, month)).or_default();
            masks.active |= bit;
            if work {
                masks.workhour_weekdays |= bit;
            }
        }
    }

    pub fn extend<'r, I: IntoIterator<Item = &'r PositioningRecord>>(&mut self, records: I) {
        for r in records {
            self.add(r);
        }
    }

    pub fn merge(&mut self, other: Self) {
        for (user, cells) in other.cells {
            let mine = self.cells.entry(user).or_default();
            for (key, m) in cells {
                let e = mine.entry(key).or_default();
                e.active |= m.active;
                e.workhour_weekdays |= m.workhour_weekdays;
            }
        }
    }

    pub fn finish(self) -> PresenceMatrix {
        let aois = (0..self.index.len() as u32).map(|p| (self.index.id(p).clone(), self.index.kind(p))).collect();
        let cells = self
            .cells
            .into_iter()
            .map(|(u, m)| (u, m.into_iter().map(|(k, v)| (k, v.stats())).collect()))
            .collect();
        PresenceMatrix { aois, cells }
    }
}

/// Presence of cohort users for every AOI and report month.
pub fn build_presence<'r, I, C>(records: I, cohort: &C, index: &AoiIndex, first: MonthId, last: MonthId, hours: WorkHours) -> PresenceMatrix
where
    I: IntoIterator<Item = &'r PositioningRecord>,
    C: CohortMembership + ?Sized,
{
    let mut b = PresenceBuilder::new(index, cohort, first, last, hours);
    b.extend(records);
    b.finish()
}

/// One exported matrix row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresenceRow<'a> {
    pub user_id: &'a UserId,
    pub aoi_id: &'a AoiId,
    pub month: MonthId,
    pub stats: PresenceStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresenceMatrix {
    aois: Vec<(AoiId, AoiKind)>,
    cells: Cells<PresenceStats>,
}

impl PresenceMatrix {
    /// Rebuilds a matrix from exported rows, e.g. an audit CSV.
    pub fn from_rows<I>(catalog: &AoiCatalog, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (UserId, AoiId, MonthId, PresenceStats)>,
    {
        let aois: Vec<(AoiId, AoiKind)> = catalog.iter().map(|a| (a.aoi_id.clone(), a.kind)).collect();
        let mut cells: Cells<PresenceStats> = BTreeMap::new();
        for (user, aoi, month, stats) in rows {
            let pos = aois
                .binary_search_by(|(id, _)| id.cmp(&aoi))
                .map_err(|_| Error::UnknownAoi(aoi.to_string()))?;
            if stats.workhour_weekdays > stats.active_days || stats.active_days > month.days() || stats.active_days == 0 {
                return Err(Error::InvalidParameter("presence row violates day-count bounds"));
            }
            cells.entry(user).or_default().insert((pos as u32, month), stats);
        }
        Ok(Self { aois, cells })
    }

    fn position(&self, aoi: &str) -> Result<u32> {
        self.aois
            .binary_search_by(|(id, _)| id.as_str().cmp(aoi))
            .map(|p| p as u32)
            .map_err(|_| Error::UnknownAoi(aoi.into()))
    }

    pub fn get(&self, user: &str, aoi: &str, month: MonthId) -> Option<PresenceStats> {
        let pos = self.position(aoi).ok()?;
        self.cells.get(user)?.get(&(pos, month)).copied()
    }

    pub fn aois(&self) -> &[(AoiId, AoiKind)] {
        &self.aois
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Rows ordered by user, then AOI id, then month.
    pub fn rows(&self) -> impl Iterator<Item = PresenceRow<'_>> {
        self.cells.iter().flat_map(move |(user, cells)| {
            cells.iter().map(move |(&(pos, month), &stats)| PresenceRow {
                user_id: user,
                aoi_id: &self.aois[pos as usize].0,
                month,
                stats,
            })
        })
    }

    fn count_where(&self, pos: u32, month: MonthId, pred: impl Fn(PresenceStats) -> bool) -> u64 {
        self.cells
            .values()
            .filter(|cells| cells.get(&(pos, month)).is_some_and(|s| pred(*s)))
            .count() as u64
    }

    pub fn count_employees(&self, aoi: &str, month: MonthId, k: u32) -> Result<u64> {
        if k < 1 {
            return Err(Error::InvalidThreshold);
        }
        let pos = self.position(aoi)?;
        Ok(self.count_where(pos, month, |s| is_employee(s, k)))
    }

    pub fn count_consumers(&self, aoi: &str, month: MonthId, k: u32) -> Result<u64> {
        if k < 1 {
            return Err(Error::InvalidThreshold);
        }
        let pos = self.position(aoi)?;
        if self.aois[pos as usize].1 != AoiKind::Commercial {
            return Err(Error::KindMismatch(aoi.into()));
        }
        Ok(self.count_where(pos, month, |s| is_consumer(s, k)))
    }

    /// Employee counts for every AOI over `first..=last`, zero-filled.
    pub fn employee_counts(&self, first: MonthId, last: MonthId, k: u32) -> Result<BTreeMap<AoiId, BTreeMap<MonthId, u64>>> {
        if k < 1 {
            return Err(Error::InvalidThreshold);
        }
        Ok(self.tally(first, last, |_| true, |s| is_employee(s, k)))
    }

    /// Consumer counts for every commercial AOI over `first..=last`.
    pub fn consumer_counts(&self, first: MonthId, last: MonthId, k: u32) -> Result<BTreeMap<AoiId, BTreeMap<MonthId, u64>>> {
        if k < 1 {
            return Err(Error::InvalidThreshold);
        }
        Ok(self.tally(first, last, |kind| kind == AoiKind::Commercial, |s| is_consumer(s, k)))
    }

    fn tally(
        &self,
        first: MonthId,
        last: MonthId,
        kind_filter: impl Fn(AoiKind) -> bool,
        pred: impl Fn(PresenceStats) -> bool,
    ) -> BTreeMap<AoiId, BTreeMap<MonthId, u64>> {
        let mut counts = alloc::vec![BTreeMap::new(); self.aois.len()];
        for (pos, (_, kind)) in self.aois.iter().enumerate() {
            if kind_filter(*kind) {
                counts[pos] = first.through(last).map(|m| (m, 0u64)).collect();
            }
        }
        for cells in self.cells.values() {
            for (&(pos, month), &s) in cells {
                if let Some(c) = counts[pos as usize].get_mut(&month) {
                    if pred(s) {
                        *c += 1;
                    }
                }
            }
        }
        self.aois
            .iter()
            .zip(counts)
            .filter(|((_, kind), _)| kind_filter(*kind))
            .map(|((id, _), c)| (id.clone(), c))
            .collect()
    }
}

pub fn is_employee(s: PresenceStats, k: u32) -> bool {
    s.workhour_weekdays as u32 >= k
}

pub fn is_consumer(s: PresenceStats, k: u32) -> bool {
    s.active_days >= 1 && (s.workhour_weekdays as u32) < k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{Date, StudyWindow};
    use crate::geo::GeoPoint;
    use crate::model::Aoi;
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn square(x: f64, y: f64) -> Vec<GeoPoint> {
        vec![GeoPoint::raw(x, y), GeoPoint::raw(x + 0.01, y), GeoPoint::raw(x + 0.01, y + 0.01), GeoPoint::raw(x, y + 0.01)]
    }

    fn setup() -> (AoiCatalog, AoiIndex) {
        let cat = AoiCatalog::new(vec![
            Aoi::new("mall", "Mall", AoiKind::Commercial, square(121.0, 31.0)).unwrap(),
            Aoi::new("park", "Park", AoiKind::IndustrialTraditional, square(121.1, 31.0)).unwrap(),
        ])
        .unwrap();
        let idx = AoiIndex::build(&cat, 0.01).unwrap();
        (cat, idx)
    }

    fn at(user: &str, x: f64, date: Date, hour: i64) -> PositioningRecord {
        let w = StudyWindow::new(i64::MIN, i64::MAX);
        PositioningRecord::new(user, x + 0.005, 31.005, date.local_midnight() + hour * 3600, &w).unwrap()
    }

    fn m(y: i32, mo: u8) -> MonthId {
        MonthId::new(y, mo).unwrap()
    }

    fn d(day: u8) -> Date {
        Date::from_ymd(2015, 6, day).unwrap() // 2015-06-01 is a Monday
    }

    fn cohort(users: &[&str]) -> BTreeSet<UserId> {
        users.iter().map(|u| UserId::new(u).unwrap()).collect()
    }

    #[test]
    fn counts_distinct_days_and_workhour_weekdays() {
        let (_, idx) = setup();
        let recs = vec![
            at("u", 121.1, d(1), 10),
            at("u", 121.1, d(1), 11), // same day
            at("u", 121.1, d(2), 10),
            at("u", 121.1, d(6), 10), // Saturday
        ];
        let mat = build_presence(&recs, &cohort(&["u"]), &idx, m(2015, 6), m(2015, 6), WorkHours::default());
        let s = mat.get("u", "park", m(2015, 6)).unwrap();
        assert_eq!(s, PresenceStats { active_days: 3, workhour_weekdays: 2 });
    }

    #[test]
    fn work_hour_bounds() {
        let (_, idx) = setup();
        let recs = vec![at("u", 121.1, d(1), 8), at("u", 121.1, d(2), 18), at("u", 121.1, d(3), 9), at("u", 121.1, d(4), 17)];
        let mat = build_presence(&recs, &cohort(&["u"]), &idx, m(2015, 6), m(2015, 6), WorkHours::default());
        assert_eq!(mat.get("u", "park", m(2015, 6)).unwrap(), PresenceStats { active_days: 4, workhour_weekdays: 2 });
    }

    #[test]
    fn non_cohort_users_ignored() {
        let (_, idx) = setup();
        let recs = vec![at("outsider", 121.1, d(1), 10)];
        let mat = build_presence(&recs, &cohort(&["u"]), &idx, m(2015, 6), m(2015, 6), WorkHours::default());
        assert!(mat.is_empty());
    }

    #[test]
    fn employee_and_consumer_rules() {
        let (_, idx) = setup();
        let mut recs = Vec::new();
        // clerk: every weekday of June at the mall
        for day in 1..=30u8 {
            if d(day).is_weekday() {
                recs.push(at("clerk", 121.0, d(day), 10));
            }
        }
        // shopper: two weekend visits
        recs.push(at("shopper", 121.0, d(6), 15));
        recs.push(at("shopper", 121.0, d(7), 15));
        // five workers with 12 weekdays each
        for w in 0..5 {
            let user = alloc::format!("w{w}");
            for day in (1..=16u8).filter(|&x| d(x).is_weekday()) {
                recs.push(at(&user, 121.1, d(day), 9));
            }
        }
        let users = ["clerk", "shopper", "w0", "w1", "w2", "w3", "w4"];
        let mat = build_presence(&recs, &cohort(&users), &idx, m(2015, 6), m(2015, 6), WorkHours::default());
        let june = m(2015, 6);
        assert_eq!(mat.count_employees("park", june, 10).unwrap(), 5);
        assert_eq!(mat.count_employees("park", june, 13).unwrap(), 0);
        assert_eq!(mat.count_consumers("mall", june, 10).unwrap(), 1);
        assert_eq!(mat.count_employees("mall", june, 10).unwrap(), 1);
        assert_eq!(mat.count_consumers("park", june, 10).unwrap_err(), Error::KindMismatch("park".into()));
        assert_eq!(mat.count_employees("park", june, 0).unwrap_err(), Error::InvalidThreshold);
        assert!(matches!(mat.count_employees("nope", june, 10), Err(Error::UnknownAoi(_))));

        let emp = mat.employee_counts(june, m(2015, 7), 10).unwrap();
        assert_eq!(emp["park"][&june], 5);
        assert_eq!(emp["park"][&m(2015, 7)], 0);
        let con = mat.consumer_counts(june, june, 10).unwrap();
        assert_eq!(con.len(), 1);
        assert_eq!(con["mall"][&june], 1);
    }

    #[test]
    fn rows_round_trip_through_from_rows() {
        let (cat, idx) = setup();
        let recs = vec![at("u", 121.1, d(1), 10), at("v", 121.0, d(2), 20)];
        let mat = build_presence(&recs, &cohort(&["u", "v"]), &idx, m(2015, 6), m(2015, 6), WorkHours::default());
        let rows: Vec<_> = mat.rows().map(|r| (r.user_id.clone(), r.aoi_id.clone(), r.month, r.stats)).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(PresenceMatrix::from_rows(&cat, rows).unwrap(), mat);
    }

    #[test]
    fn sharded_build_matches_single_pass() {
        let (_, idx) = setup();
        let recs: Vec<_> = (1..=30u8).map(|day| at(if day % 3 == 0 { "a" } else { "b" }, 121.1, d(day), (day % 12) as i64 + 6)).collect();
        let c = cohort(&["a", "b"]);
        let whole = build_presence(&recs, &c, &idx, m(2015, 6), m(2015, 6), WorkHours::default());
        let mut left = PresenceBuilder::new(&idx, &c, m(2015, 6), m(2015, 6), WorkHours::default());
        let mut right = PresenceBuilder::new(&idx, &c, m(2015, 6), m(2015, 6), WorkHours::default());
        left.extend(&recs[..13]);
        right.extend(&recs[13..]);
        right.merge(left);
        assert_eq!(right.finish(), whole);
    }
}
