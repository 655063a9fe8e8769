//! Civil calendar under a fixed UTC+8 offset.
//!
//! All bucketing (days, months, weekdays, work hours) happens in local time.
//! There is no DST to worry about.

use core::fmt;
use core::str::FromStr;

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

pub const LOCAL_OFFSET_SECS: i64 = 8 * 3600;
const SECS_PER_DAY: i64 = 86_400;

/// A calendar month. Orders by year, then month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthId {
    year: i32,
    month: u8,
}

impl MonthId {
    pub const fn new(year: i32, month: u8) -> Option<Self> {
        if month >= 1 && month <= 12 {
            Some(Self { year, month })
        } else {
            None
        }
    }

    pub const fn year(self) -> i32 {
        self.year
    }

    pub const fn month(self) -> u8 {
        self.month
    }

    /// Months since year 0, January. Handy for arithmetic.
    pub const fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub const fn from_ordinal(ord: i64) -> Self {
        let year = ord.div_euclid(12);
        let month = ord.rem_euclid(12) as u8 + 1;
        Self { year: year as i32, month }
    }

    pub const fn succ(self) -> Self {
        self.add_months(1)
    }

    pub const fn pred(self) -> Self {
        self.add_months(-1)
    }

    pub const fn add_months(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    /// Signed number of months from `self` to `later`.
    pub const fn months_until(self, later: MonthId) -> i64 {
        later.ordinal() - self.ordinal()
    }

    pub fn first_day(self) -> Date {
        Date::from_ymd(self.year, self.month, 1).expect("day 1 always exists")
    }

    pub fn last_day(self) -> Date {
        Date::from_ymd(self.year, self.month, self.days()).expect("last day exists")
    }

    pub const fn days(self) -> u8 {
        days_in_month(self.year, self.month)
    }

    /// Inclusive iterator from `self` through `last`.
    pub fn through(self, last: MonthId) -> impl Iterator<Item = MonthId> + Clone {
        let start = self.ordinal();
        (start..=last.ordinal()).map(MonthId::from_ordinal)
    }
}

impl fmt::Display for MonthId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthId {
    type Err = ParseDateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s.trim().split_once('-').ok_or(ParseDateError)?;
        let year = y.parse().map_err(|_| ParseDateError)?;
        let month = m.parse().map_err(|_| ParseDateError)?;
        MonthId::new(year, month).ok_or(ParseDateError)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseDateError;

impl fmt::Display for ParseDateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid date")
    }
}

impl core::error::Error for ParseDateError {}

/// Local calendar date, stored as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(i32);

impl Date {
    pub const fn from_days(days: i32) -> Self {
        Self(days)
    }

    pub const fn days(self) -> i32 {
        self.0
    }

    pub fn from_ymd(year: i32, month: u8, day: u8) -> Option<Self> {
        if !(1..=12).contains(&month) || day < 1 || day > days_in_month(year, month) {
            return None;
        }
        Some(Self(days_from_civil(year, month, day)))
    }

    pub fn ymd(self) -> (i32, u8, u8) {
        civil_from_days(self.0)
    }

    pub fn month_id(self) -> MonthId {
        let (y, m, _) = self.ymd();
        MonthId { year: y, month: m }
    }

    pub fn day_of_month(self) -> u8 {
        self.ymd().2
    }

    /// 0 = Monday .. 6 = Sunday.
    pub const fn weekday(self) -> u8 {
        // 1970-01-01 was a Thursday.
        (self.0 as i64 + 3).rem_euclid(7) as u8
    }

    pub const fn is_weekday(self) -> bool {
        self.weekday() < 5
    }

    pub const fn add_days(self, n: i32) -> Self {
        Self(self.0 + n)
    }

    pub const fn days_until(self, later: Date) -> i32 {
        later.0 - self.0
    }

    /// UTC timestamp of local midnight starting this date.
    pub const fn local_midnight(self) -> Timestamp {
        self.0 as i64 * SECS_PER_DAY - LOCAL_OFFSET_SECS
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = self.ymd();
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl FromStr for Date {
    type Err = ParseDateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().splitn(3, '-');
        let y = parts.next().and_then(|p| p.parse().ok()).ok_or(ParseDateError)?;
        let m = parts.next().and_then(|p| p.parse().ok()).ok_or(ParseDateError)?;
        let d = parts.next().and_then(|p| p.parse().ok()).ok_or(ParseDateError)?;
        Date::from_ymd(y, m, d).ok_or(ParseDateError)
    }
}

pub const fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub const fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

// Howard Hinnant's days_from_civil / civil_from_days.
fn days_from_civil(year: i32, month: u8, day: u8) -> i32 {
    let y = if month <= 2 { year as i64 - 1 } else { year as i64 };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = month as i64;
    let mp = if m > 2 { m - 3 } else { m + 9 };
    let doy = (153 * mp + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    (era * 146_097 + doe - 719_468) as i32
}

fn civil_from_days(days: i32) -> (i32, u8, u8) {
    let z = days as i64 + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u8;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u8;
    let y = yoe + era * 400 + if m <= 2 { 1 } else { 0 };
    (y as i32, m, d)
}

/// Local (UTC+8) calendar date of a timestamp.
pub const fn local_date(ts: Timestamp) -> Date {
    Date((ts + LOCAL_OFFSET_SECS).div_euclid(SECS_PER_DAY) as i32)
}

/// Seconds elapsed since local midnight.
pub const fn local_second_of_day(ts: Timestamp) -> u32 {
    (ts + LOCAL_OFFSET_SECS).rem_euclid(SECS_PER_DAY) as u32
}

/// Calendar month of a timestamp in local time.
pub fn month_of(ts: Timestamp) -> MonthId {
    local_date(ts).month_id()
}

/// Inclusive range of study timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StudyWindow {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl StudyWindow {
    pub const fn new(start: Timestamp, end: Timestamp) -> Self {
        Self { start, end }
    }

    /// Window covering whole local days `first` through `last`.
    pub const fn from_dates(first: Date, last: Date) -> Self {
        Self { start: first.local_midnight(), end: last.add_days(1).local_midnight() - 1 }
    }

    pub const fn contains(&self, ts: Timestamp) -> bool {
        ts >= self.start && ts <= self.end
    }

    pub fn first_month(&self) -> MonthId {
        month_of(self.start)
    }

    pub fn last_month(&self) -> MonthId {
        month_of(self.end)
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::{Date, MonthId};
    use alloc::string::ToString;
    use serde::{Serialize, Serializer};

    impl Serialize for Date {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&self.to_string())
        }
    }

    impl Serialize for MonthId {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&self.to_string())
        }
    }
}
