//! Seasonal autoregressions of daily foot traffic, optionally augmented with
//! same-day map-query volume, and their out-of-sample evaluation.
//!
//! ```text
//! Baseline        y_t = b0 + b1 y_{t-1} + b2 y_{t-7} + e_t
//! QueryAugmented  y_t = b0 + b1 y_{t-1} + b2 y_{t-7} + b3 q_t + e_t
//! QueryOnly       y_t = b0 + b3 q_t + e_t
//! ```
//!
//! All three specs use the same rows (`t >= 7`), so their R² values are
//! directly comparable.

mod ols;
mod series;
mod stats;

use alloc::string::String;
use alloc::vec::Vec;

pub use ols::{ols, ols_with, Collinearity, Matrix, RegressionFit, COLLINEARITY_TOL};
pub use series::DailySeries;
pub use stats::{pearson, regularized_incomplete_beta, student_t_two_sided_p, Correlation};

use crate::calendar::Date;
use crate::error::{Error, Result};

/// Longest lag in any spec.
pub const MAX_LAG: usize = 7;

/// Design rows required before the first rolling forecast.
pub const MIN_TRAINING_ROWS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelSpec {
    Baseline,
    QueryAugmented,
    QueryOnly,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 3] = [ModelSpec::Baseline, ModelSpec::QueryAugmented, ModelSpec::QueryOnly];

    pub fn label(self) -> &'static str {
        match self {
            ModelSpec::Baseline => "baseline",
            ModelSpec::QueryAugmented => "query_augmented",
            ModelSpec::QueryOnly => "query_only",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == s)
    }

    pub fn uses_queries(self) -> bool {
        !matches!(self, ModelSpec::Baseline)
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ModelSpec::Baseline => &["const", "y_lag1", "y_lag7"],
            ModelSpec::QueryAugmented => &["const", "y_lag1", "y_lag7", "q"],
            ModelSpec::QueryOnly => &["const", "q"],
        }
    }

    fn row(self, y: &[f64], q: Option<&[f64]>, t: usize, out: &mut Vec<f64>) {
        out.push(1.0);
        if self != ModelSpec::QueryOnly {
            out.push(y[t - 1]);
            out.push(y[t - MAX_LAG]);
        }
        if let Some(q) = q.filter(|_| self.uses_queries()) {
            out.push(q[t]);
        }
    }
}

/// Target vector and regressor matrix for one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub spec: ModelSpec,
    pub dates: Vec<Date>,
    pub target: Vec<f64>,
    pub x: Matrix,
}

fn check_inputs<'a>(y: &'a DailySeries, q: Option<&'a DailySeries>, spec: ModelSpec) -> Result<Option<&'a [f64]>> {
    let q = match (spec.uses_queries(), q) {
        (true, None) => return Err(Error::InvalidParameter("spec requires a query series")),
        (true, Some(q)) => {
            if !q.is_aligned_with(y) {
                return Err(Error::Misaligned);
            }
            Some(q.values())
        }
        (false, _) => None,
    };
    if y.len() < MAX_LAG + 1 {
        return Err(Error::SeriesTooShort { need: MAX_LAG + 1, got: y.len() });
    }
    Ok(q)
}

/// One row per day `t >= 7`, columns in [`ModelSpec::columns`] order.
pub fn build_design(y: &DailySeries, q: Option<&DailySeries>, spec: ModelSpec) -> Result<Design> {
    let qv = check_inputs(y, q, spec)?;
    let yv = y.values();
    let rows = yv.len() - MAX_LAG;
    let mut data = Vec::with_capacity(rows * spec.columns().len());
    for t in MAX_LAG..yv.len() {
        spec.row(yv, qv, t, &mut data);
    }
    let names = spec.columns().iter().map(|s| String::from(*s)).collect();
    Ok(Design {
        spec,
        dates: (MAX_LAG..yv.len()).map(|t| y.date_at(t)).collect(),
        target: yv[MAX_LAG..].to_vec(),
        x: Matrix::new(rows, names, data)?,
    })
}

/// Builds the design and fits it by least squares.
pub fn fit_model(y: &DailySeries, q: Option<&DailySeries>, spec: ModelSpec) -> Result<RegressionFit> {
    let d = build_design(y, q, spec)?;
    let mut fit = ols(&d.target, &d.x)?;
    fit.spec = Some(spec);
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ForecastRecord {
    pub date: Date,
    pub actual: f64,
    pub predicted: f64,
    pub abs_error: f64,
}

impl ForecastRecord {
    pub fn new(date: Date, actual: f64, predicted: f64) -> Self {
        Self { date, actual, predicted, abs_error: libm::fabs(actual - predicted) }
    }
}

/// Expanding-window one-step forecasts for every date from `start` to the end
/// of `y`. Each date is predicted from a fit on strictly earlier rows, using
/// realized lags and same-day query volume.
///
/// Collinear columns in a training window (e.g. a constant series) are
/// dropped rather than rejected so that the forecast stays defined.
pub fn rolling_forecast(y: &DailySeries, q: Option<&DailySeries>, spec: ModelSpec, start: Date) -> Result<Vec<ForecastRecord>> {
    let design = build_design(y, q, spec)?;
    let first = design.dates.partition_point(|d| *d < start);
    if first < MIN_TRAINING_ROWS {
        return Err(Error::InsufficientTraining { need: MIN_TRAINING_ROWS, got: first });
    }
    (first..design.dates.len())
        .map(|i| {
            let x = design.x.select_rows(0..i);
            let fit = ols_with(&design.target[..i], &x, Collinearity::Drop)?;
            Ok(ForecastRecord::new(design.dates[i], design.target[i], fit.predict(design.x.row(i))))
        })
        .collect()
}

/// Mean absolute error.
pub fn mae(records: &[ForecastRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(records.iter().map(|r| r.abs_error).sum::<f64>() / records.len() as f64)
}

/// `q_t / platform_t`, rescaled by the mean platform total.
pub fn normalize_queries(q: &DailySeries, platform: &DailySeries) -> Result<DailySeries> {
    if !q.is_aligned_with(platform) {
        return Err(Error::Misaligned);
    }
    if let Some((date, _)) = platform.iter().find(|(_, v)| *v <= 0.0) {
        return Err(Error::ZeroPlatformVolume(date));
    }
    if q.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean = platform.values().iter().sum::<f64>() / platform.len() as f64;
    DailySeries::new(q.start(), q.values().iter().zip(platform.values()).map(|(a, p)| a / p * mean).collect())
}
