//! Flags sustained forecast-error spikes in a suspected venue group that a
//! control group does not share.
//!
//! Each group gets its own query-augmented fit on the training window. Scan
//! days after the window are scored as `(actual - predicted) / sigma`, where
//! sigma is the group's training residual deviation. A window is a maximal
//! run of at least `min_run` days with suspected z above the threshold, kept
//! only if the control group stays at or below the threshold on at least
//! `control_quiet_share` of those days.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::calendar::Date;
use crate::econometrics::{build_design, ols, DailySeries, ModelSpec, MIN_TRAINING_ROWS};
use crate::error::{Error, Result};

pub const DEFAULT_Z_THRESHOLD: f64 = 3.0;
pub const DEFAULT_MIN_RUN: usize = 5;
pub const DEFAULT_CONTROL_QUIET_SHARE: f64 = 0.8;

/// Per-date sum over a venue set.
pub fn group_series<S: AsRef<str>>(panel: &BTreeMap<S, DailySeries>, venues: &[S]) -> Result<DailySeries>
where
    S: Ord,
{
    if venues.is_empty() {
        return Err(Error::EmptyVenueSet);
    }
    let series = venues
        .iter()
        .map(|v| panel.get(v).ok_or_else(|| Error::UnknownVenue(v.as_ref().into())))
        .collect::<Result<Vec<_>>>()?;
    DailySeries::sum(series)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    /// Inclusive training range; scanning starts the day after `train_last`.
    pub train_first: Date,
    pub train_last: Date,
    pub z_threshold: f64,
    pub min_run: usize,
    pub control_quiet_share: f64,
}

impl DetectParams {
    pub fn new(train_first: Date, train_last: Date) -> Self {
        Self {
            train_first,
            train_last,
            z_threshold: DEFAULT_Z_THRESHOLD,
            min_run: DEFAULT_MIN_RUN,
            control_quiet_share: DEFAULT_CONTROL_QUIET_SHARE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AnomalyReport {
    /// Inclusive `(start, end)` pairs in date order.
    pub flagged_windows: Vec<(Date, Date)>,
    pub suspected_z: Vec<(Date, f64)>,
    pub control_z: Vec<(Date, f64)>,
    pub z_threshold: f64,
    pub min_run: usize,
    pub control_quiet_share: f64,
    pub train_first: Date,
    pub train_last: Date,
}

/// Standardized out-of-sample residuals for the scan days of one group.
pub fn scan_z(y: &DailySeries, q: &DailySeries, train_first: Date, train_last: Date) -> Result<Vec<(Date, f64)>> {
    let design = build_design(y, Some(q), ModelSpec::QueryAugmented)?;
    let lo = design.dates.partition_point(|d| *d < train_first);
    let hi = design.dates.partition_point(|d| *d <= train_last);
    let rows = hi.saturating_sub(lo);
    if rows < MIN_TRAINING_ROWS {
        return Err(Error::InsufficientTraining { need: MIN_TRAINING_ROWS, got: rows });
    }
    let fit = ols(&design.target[lo..hi], &design.x.select_rows(lo..hi))?;
    let sigma = fit.sigma();
    if !(sigma > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((hi..design.dates.len())
        .map(|i| (design.dates[i], (design.target[i] - fit.predict(design.x.row(i))) / sigma))
        .collect())
}

pub fn detect(
    suspected: &DailySeries,
    suspected_q: &DailySeries,
    control: &DailySeries,
    control_q: &DailySeries,
    params: &DetectParams,
) -> Result<AnomalyReport> {
    if params.min_run < 1 || !params.z_threshold.is_finite() || !(0.0..=1.0).contains(&params.control_quiet_share) {
        return Err(Error::InvalidParameter("z_threshold, min_run or control_quiet_share"));
    }
    if params.train_last < params.train_first {
        return Err(Error::InvalidParameter("training window is empty"));
    }
    if !suspected.is_aligned_with(control) {
        return Err(Error::Misaligned);
    }
    let sz = scan_z(suspected, suspected_q, params.train_first, params.train_last)?;
    let cz = scan_z(control, control_q, params.train_first, params.train_last)?;
    if sz.is_empty() {
        return Err(Error::InvalidParameter("no scan days after the training window"));
    }
    let windows = flag_runs(
        &sz.iter().map(|p| p.1).collect::<Vec<_>>(),
        &cz.iter().map(|p| p.1).collect::<Vec<_>>(),
        params.z_threshold,
        params.min_run,
        params.control_quiet_share,
    )
    .into_iter()
    .map(|(a, b)| (sz[a].0, sz[b].0))
    .collect();
    Ok(AnomalyReport {
        flagged_windows: windows,
        suspected_z: sz,
        control_z: cz,
        z_threshold: params.z_threshold,
        min_run: params.min_run,
        control_quiet_share: params.control_quiet_share,
        train_first: params.train_first,
        train_last: params.train_last,
    })
}

/// Index ranges `(first, last)` of qualifying runs over aligned z vectors.
pub fn flag_runs(suspected: &[f64], control: &[f64], threshold: f64, min_run: usize, quiet_share: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < suspected.len() {
        if suspected[i] <= threshold {
            i += 1;
            continue;
        }
        let start = i;
        while i < suspected.len() && suspected[i] > threshold {
            i += 1;
        }
        let len = i - start;
        if len >= min_run {
            let quiet = control[start..i].iter().filter(|z| **z <= threshold).count();
            if quiet as f64 >= quiet_share * len as f64 {
                out.push((start, i - 1));
            }
        }
    }
    out
}

/// Intersection over union of two inclusive date ranges.
pub fn window_iou(a: (Date, Date), b: (Date, Date)) -> f64 {
    let inter = (a.1.min(b.1).days() - a.0.max(b.0).days() + 1).max(0);
    let union = (a.1.days() - a.0.days() + 1) + (b.1.days() - b.0.days() + 1) - inter;
    inter as f64 / union as f64
}
