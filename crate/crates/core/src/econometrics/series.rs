use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::calendar::Date;
use crate::error::{Error, Result};

/// A contiguous daily series of finite, non-negative values.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    start: Date,
    values: Vec<f64>,
}

impl DailySeries {
    pub fn new(start: Date, values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSeriesValue { date: start.add_days(i as i32), reason: "non-finite value" });
            }
            if *v < 0.0 {
                return Err(Error::InvalidSeriesValue { date: start.add_days(i as i32), reason: "negative value" });
            }
        }
        Ok(Self { start, values })
    }

    /// Builds a series from dated values; every date between the first and
    /// last key must be present.
    pub fn from_map(map: &BTreeMap<Date, f64>) -> Result<Self> {
        let Some((&start, _)) = map.iter().next() else {
            return Err(Error::EmptyInput);
        };
        let mut values = Vec::with_capacity(map.len());
        for (i, (&date, &v)) in map.iter().enumerate() {
            let expected = start.add_days(i as i32);
            if date != expected {
                return Err(Error::InvalidSeriesValue { date: expected, reason: "missing date" });
            }
            values.push(v);
        }
        Self::new(start, values)
    }

    pub fn start(&self) -> Date {
        self.start
    }

    /// Last date; equals `start` minus one day for an empty series.
    pub fn end(&self) -> Date {
        self.start.add_days(self.values.len() as i32 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn date_at(&self, i: usize) -> Date {
        self.start.add_days(i as i32)
    }

    pub fn index_of(&self, date: Date) -> Option<usize> {
        let off = self.start.days_until(date);
        (off >= 0 && (off as usize) < self.values.len()).then_some(off as usize)
    }

    pub fn get(&self, date: Date) -> Option<f64> {
        self.index_of(date).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Date, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.date_at(i), v))
    }

    pub fn is_aligned_with(&self, other: &DailySeries) -> bool {
        self.start == other.start && self.values.len() == other.values.len()
    }

    /// Sub-series over `first..=last`; both ends must lie inside.
    pub fn slice(&self, first: Date, last: Date) -> Result<DailySeries> {
        match (self.index_of(first), self.index_of(last)) {
            (Some(a), Some(b)) if a <= b => Ok(Self { start: first, values: self.values[a..=b].to_vec() }),
            _ => Err(Error::Misaligned),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<DailySeries> {
        Self::new(self.start, self.values.iter().map(|v| v * factor).collect())
    }

    /// Element-wise sum of aligned series.
    pub fn sum<'a, I: IntoIterator<Item = &'a DailySeries>>(series: I) -> Result<DailySeries> {
        let mut it = series.into_iter();
        let first = it.next().ok_or(Error::EmptyInput)?;
        let mut acc = first.clone();
        for s in it {
            if !s.is_aligned_with(&acc) {
                return Err(Error::Misaligned);
            }
            for (a, b) in acc.values.iter_mut().zip(&s.values) {
                *a += b;
            }
        }
        Ok(acc)
    }
}
