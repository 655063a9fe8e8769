//! Daily foot traffic per AOI and daily query volume per POI.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::calendar::{local_date, Date};
use crate::econometrics::DailySeries;
use crate::model::{AoiId, AoiKind, MapQueryRecord, PoiId, PositioningRecord, UserId};
use crate::spatial::AoiIndex;

/// Distinct users seen inside each tracked AOI per local day.
#[derive(Debug, Clone)]
pub struct FootTrafficBuilder<'a> {
    index: &'a AoiIndex,
    first: Date,
    last: Date,
    tracked: Vec<bool>,
    seen: BTreeSet<(u32, Date, UserId)>,
    scratch: Vec<u32>,
}

impl<'a> FootTrafficBuilder<'a> {
    pub fn new(index: &'a AoiIndex, kinds: &[AoiKind], first: Date, last: Date) -> Self {
        let tracked = (0..index.len() as u32).map(|p| kinds.contains(&index.kind(p))).collect();
        Self { index, first, last, tracked, seen: BTreeSet::new(), scratch: Vec::new() }
    }

    pub fn add(&mut self, r: &PositioningRecord) {
        let day = local_date(r.timestamp);
        if day < self.first || day > self.last {
            return;
        }
        self.scratch.clear();
        self.index.assign_into(r.point, &mut self.scratch);
        for &pos in &self.scratch {
            if self.tracked[pos as usize] {
                self.seen.insert((pos, day, r.user_id.clone()));
            }
        }
    }

    pub fn extend<'r, I: IntoIterator<Item = &'r PositioningRecord>>(&mut self, records: I) {
        for r in records {
            self.add(r);
        }
    }

    pub fn merge(&mut self, other: Self) {
        self.seen.extend(other.seen);
    }

    /// One zero-filled series per tracked AOI over `first..=last`.
    pub fn finish(self) -> BTreeMap<AoiId, DailySeries> {
        let days = (self.first.days_until(self.last) + 1).max(0) as usize;
        let mut counts = vec![vec![0.0; days]; self.index.len()];
        for (pos, day, _) in &self.seen {
            counts[*pos as usize][self.first.days_until(*day) as usize] += 1.0;
        }
        counts
            .into_iter()
            .enumerate()
            .filter(|(pos, _)| self.tracked[*pos])
            .map(|(pos, v)| (self.index.id(pos as u32).clone(), DailySeries::new(self.first, v).expect("counts are finite")))
            .collect()
    }
}

pub fn daily_foot_traffic<'r, I>(records: I, index: &AoiIndex, kinds: &[AoiKind], first: Date, last: Date) -> BTreeMap<AoiId, DailySeries>
where
    I: IntoIterator<Item = &'r PositioningRecord>,
{
    let mut b = FootTrafficBuilder::new(index, kinds, first, last);
    b.extend(records);
    b.finish()
}

/// Distinct (user, POI, local day) query events per POI and day, zero-filled
/// over `first..=last` for every POI in `pois`.
pub fn daily_query_volume<'r, I>(queries: I, pois: &[PoiId], first: Date, last: Date) -> BTreeMap<PoiId, DailySeries>
where
    I: IntoIterator<Item = &'r MapQueryRecord>,
{
    let days = (first.days_until(last) + 1).max(0) as usize;
    let wanted: BTreeMap<&str, usize> = pois.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let mut seen: BTreeSet<(usize, Date, &str)> = BTreeSet::new();
    let mut counts = vec![vec![0.0; days]; pois.len()];
    for q in queries {
        let Some(&i) = wanted.get(q.poi_id.as_str()) else {
            continue;
        };
        let day = local_date(q.timestamp);
        if day < first || day > last {
            continue;
        }
        if seen.insert((i, day, q.user_id.as_str())) {
            counts[i][first.days_until(day) as usize] += 1.0;
        }
    }
    pois.iter()
        .zip(counts)
        .map(|(p, v)| (p.clone(), DailySeries::new(first, v).expect("counts are finite")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::StudyWindow;
    use crate::geo::GeoPoint;
    use crate::model::{Aoi, AoiCatalog};

    fn world() -> AoiIndex {
        let sq = |x: f64| {
            vec![GeoPoint::raw(x, 0.0), GeoPoint::raw(x + 1.0, 0.0), GeoPoint::raw(x + 1.0, 1.0), GeoPoint::raw(x, 1.0)]
        };
        let cat = AoiCatalog::new(vec![
            Aoi::new("mall", "Mall", AoiKind::Commercial, sq(0.0)).unwrap(),
            Aoi::new("park", "Park", AoiKind::IndustrialHighTech, sq(2.0)).unwrap(),
        ])
        .unwrap();
        AoiIndex::build(&cat, 0.5).unwrap()
    }

    #[test]
    fn distinct_users_per_day() {
        let idx = world();
        let w = StudyWindow::new(i64::MIN, i64::MAX);
        let d0: Date = "2015-03-02".parse().unwrap();
        let t = d0.local_midnight() + 36_000;
        let recs = vec![
            PositioningRecord::new("a", 0.5, 0.5, t, &w).unwrap(),
            PositioningRecord::new("a", 0.6, 0.5, t + 60, &w).unwrap(),
            PositioningRecord::new("b", 0.5, 0.5, t, &w).unwrap(),
            PositioningRecord::new("b", 0.5, 0.5, t + 86_400, &w).unwrap(),
            PositioningRecord::new("c", 2.5, 0.5, t, &w).unwrap(),
        ];
        let ft = daily_foot_traffic(&recs, &idx, &[AoiKind::Commercial], d0, d0.add_days(2));
        assert_eq!(ft.len(), 1);
        assert_eq!(ft["mall"].values(), &[2.0, 1.0, 0.0]);
    }

    #[test]
    fn query_volume_dedups_same_day() {
        let w = StudyWindow::new(i64::MIN, i64::MAX);
        let d0: Date = "2015-03-02".parse().unwrap();
        let t = d0.local_midnight() + 36_000;
        let qs = vec![
            MapQueryRecord::new("a", "p", None, t, &w).unwrap(),
            MapQueryRecord::new("a", "p", None, t + 5, &w).unwrap(),
            MapQueryRecord::new("b", "p", None, t, &w).unwrap(),
            MapQueryRecord::new("b", "other", None, t, &w).unwrap(),
        ];
        let pois = vec![PoiId::new("p").unwrap()];
        let v = daily_query_volume(&qs, &pois, d0, d0.add_days(1));
        assert_eq!(v["p"].values(), &[2.0, 0.0]);
    }
}
