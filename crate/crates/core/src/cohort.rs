//! Continuous-user sampling over a 13-month rolling window.
//!
//! A user belongs to the cohort of report month `m` when they have at least
//! one positioning record in every month `m-12 ..= m`. Because the window
//! spans 13 months, `m` and `m-12` always share a cohort, which keeps
//! year-over-year comparisons on one sample.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::calendar::{month_of, MonthId};
use crate::error::{Error, Result};
use crate::model::{PositioningRecord, UserId};

/// Months in the rolling window, report month included.
pub const WINDOW_MONTHS: i64 = 13;

/// user -> months with at least one record.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivityCalendar {
    users: BTreeMap<UserId, BTreeSet<MonthId>>,
    coverage: Option<(MonthId, MonthId)>,
}

impl ActivityCalendar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, user: &UserId, month: MonthId) {
        match self.users.get_mut(user.as_str()) {
            Some(set) => {
                set.insert(month);
            }
            None => {
                self.users.insert(user.clone(), BTreeSet::from([month]));
            }
        }
        self.coverage = Some(match self.coverage {
            None => (month, month),
            Some((lo, hi)) => (lo.min(month), hi.max(month)),
        });
    }

    /// Union with another shard's calendar.
    pub fn merge(&mut self, other: ActivityCalendar) {
        for (user, months) in other.users {
            self.users.entry(user).or_default().extend(months);
        }
        self.coverage = match (self.coverage, other.coverage) {
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
            (x, None) | (None, x) => x,
        };
    }

    /// Declares the months the data is known to cover. Without this the
    /// coverage is the span of observed months.
    pub fn with_coverage(mut self, first: MonthId, last: MonthId) -> Self {
        self.coverage = Some((first, last));
        self
    }

    pub fn coverage(&self) -> Option<(MonthId, MonthId)> {
        self.coverage
    }

    pub fn months(&self, user: &str) -> Option<&BTreeSet<MonthId>> {
        self.users.get(user)
    }

    pub fn users(&self) -> impl Iterator<Item = (&UserId, &BTreeSet<MonthId>)> {
        self.users.iter()
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// True when `user` is active in all 13 months ending at `report`.
    pub fn is_continuous(&self, user: &str, report: MonthId) -> bool {
        self.users.get(user).is_some_and(|months| full_window(months, report))
    }
}

fn full_window(months: &BTreeSet<MonthId>, report: MonthId) -> bool {
    let first = report.add_months(-(WINDOW_MONTHS - 1));
    months.range(first..=report).count() as i64 == WINDOW_MONTHS
}

/// Groups records into per-user active-month sets.
pub fn monthly_activity<'a, I>(records: I) -> ActivityCalendar
where
    I: IntoIterator<Item = &'a PositioningRecord>,
{
    let mut cal = ActivityCalendar::new();
    for r in records {
        cal.record(&r.user_id, month_of(r.timestamp));
    }
    cal
}

/// Users active in every month of the window ending at `report`.
pub fn continuous_users(calendar: &ActivityCalendar, report: MonthId) -> Result<BTreeSet<UserId>> {
    let first = report.add_months(-(WINDOW_MONTHS - 1));
    match calendar.coverage {
        Some((lo, hi)) if lo <= first && report <= hi => {}
        _ => return Err(Error::InsufficientHistory { month: report }),
    }
    Ok(calendar
        .users
        .iter()
        .filter(|(_, months)| full_window(months, report))
        .map(|(u, _)| u.clone())
        .collect())
}

/// Who counts as a cohort member in a given month.
pub trait CohortMembership {
    fn is_member(&self, user: &str, month: MonthId) -> bool;
}

/// A fixed user set, independent of month.
impl CohortMembership for BTreeSet<UserId> {
    fn is_member(&self, user: &str, _month: MonthId) -> bool {
        self.contains(user)
    }
}

/// Per-report-month cohorts, recomputed each month.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CohortSchedule {
    members: BTreeMap<MonthId, BTreeSet<UserId>>,
}

impl CohortSchedule {
    /// Cohorts for every report month from `first` through `last`.
    pub fn build(calendar: &ActivityCalendar, first: MonthId, last: MonthId) -> Result<Self> {
        let mut members = BTreeMap::new();
        for m in first.through(last) {
            members.insert(m, continuous_users(calendar, m)?);
        }
        Ok(Self { members })
    }

    pub fn from_members(members: BTreeMap<MonthId, BTreeSet<UserId>>) -> Self {
        Self { members }
    }

    pub fn get(&self, month: MonthId) -> Option<&BTreeSet<UserId>> {
        self.members.get(&month)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MonthId, &BTreeSet<UserId>)> {
        self.members.iter()
    }

    pub fn months(&self) -> impl Iterator<Item = MonthId> + '_ {
        self.members.keys().copied()
    }
}

impl CohortMembership for CohortSchedule {
    fn is_member(&self, user: &str, month: MonthId) -> bool {
        self.members.get(&month).is_some_and(|s| s.contains(user))
    }
}
