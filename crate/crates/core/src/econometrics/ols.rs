//! Ordinary least squares through Householder QR on column-scaled regressors.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::stats::student_t_two_sided_p;
use super::ModelSpec;
use crate::error::{Error, Result};

/// A column whose part orthogonal to the earlier (unit-scaled) columns has
/// norm below this is treated as collinear. Corresponds to rejecting designs
/// with condition number above about 1e12.
pub const COLLINEARITY_TOL: f64 = 1e-12;

/// Dense row-major regressor matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    names: Vec<String>,
}

impl Matrix {
    pub fn new(rows: usize, names: Vec<String>, data: Vec<f64>) -> Result<Self> {
        let cols = names.len();
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { rows, cols, data, names })
    }

    /// Unnamed columns get `x0`, `x1`, ...
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch);
        }
        let names = (0..cols).map(|j| alloc::format!("x{j}")).collect();
        Self::new(rows.len(), names, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Keeps only the listed rows, in order.
    pub fn select_rows(&self, rows: impl IntoIterator<Item = usize>) -> Matrix {
        let mut data = Vec::new();
        let mut n = 0;
        for i in rows {
            data.extend_from_slice(self.row(i));
            n += 1;
        }
        Matrix { rows: n, cols: self.cols, data, names: self.names.clone() }
    }
}

/// What to do with a collinear column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collinearity {
    Reject,
    /// Fix the coefficient at zero and fit the remaining columns.
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegressionFit {
    pub spec: Option<ModelSpec>,
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    /// NaN when the column was dropped or there are no residual degrees of
    /// freedom.
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub n_observations: usize,
    pub df_resid: usize,
    pub dropped: Vec<String>,
}

impl RegressionFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum()
    }

    /// Residual standard deviation, `sqrt(SSR / df)`.
    pub fn sigma(&self) -> f64 {
        let ssr: f64 = self.residuals.iter().map(|e| e * e).sum();
        libm::sqrt(ssr / self.df_resid as f64)
    }
}

/// Least squares with rank-deficient designs rejected, naming the offending
/// column.
pub fn ols(target: &[f64], x: &Matrix) -> Result<RegressionFit> {
    ols_with(target, x, Collinearity::Reject)
}

pub fn ols_with(target: &[f64], x: &Matrix, policy: Collinearity) -> Result<RegressionFit> {
    let n = x.rows;
    let k = x.cols;
    if target.len() != n {
        return Err(Error::ShapeMismatch);
    }
    if n == 0 || k == 0 {
        return Err(Error::EmptyInput);
    }
    if n < k {
        return Err(Error::SeriesTooShort { need: k, got: n });
    }

    // column-major, each column scaled to unit norm
    let mut scale = vec![0.0; k];
    let mut a = vec![0.0; n * k];
    for j in 0..k {
        let norm = libm::sqrt((0..n).map(|i| x.get(i, j) * x.get(i, j)).sum());
        scale[j] = norm;
        if norm > 0.0 {
            for i in 0..n {
                a[j * n + i] = x.get(i, j) / norm;
            }
        }
    }
    let mut qty = target.to_vec();
    let mut kept: Vec<usize> = Vec::with_capacity(k);
    let mut dropped = Vec::new();
    let mut v = vec![0.0; n];

    for j in 0..k {
        let r = kept.len();
        let col = &a[j * n..(j + 1) * n];
        let norm = libm::sqrt(col[r..].iter().map(|c| c * c).sum());
        if !(norm > COLLINEARITY_TOL) {
            match policy {
                Collinearity::Reject => return Err(Error::RankDeficient { column: x.names[j].clone() }),
                Collinearity::Drop => {
                    dropped.push(j);
                    continue;
                }
            }
        }
        let alpha = if col[r] >= 0.0 { -norm } else { norm };
        let m = n - r;
        v[..m].copy_from_slice(&col[r..]);
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|c| c * c).sum();
        let reflect = |slice: &mut [f64]| {
            let dot: f64 = slice.iter().zip(&v[..m]).map(|(s, w)| s * w).sum();
            let f = 2.0 * dot / vnorm2;
            for (s, w) in slice.iter_mut().zip(&v[..m]) {
                *s -= f * w;
            }
        };
        for jj in j + 1..k {
            reflect(&mut a[jj * n + r..(jj + 1) * n]);
        }
        reflect(&mut qty[r..]);
        a[j * n + r] = alpha;
        for i in r + 1..n {
            a[j * n + i] = 0.0;
        }
        kept.push(j);
    }

    let rank = kept.len();
    let rr = |p: usize, q: usize| a[kept[q] * n + p];
    // back substitution in scaled coordinates
    let mut beta_s = vec![0.0; rank];
    for q in (0..rank).rev() {
        let mut acc = qty[q];
        for s in q + 1..rank {
            acc -= rr(q, s) * beta_s[s];
        }
        beta_s[q] = acc / rr(q, q);
    }
    // R^-1, upper triangular
    let mut rinv = vec![0.0; rank * rank];
    for c in 0..rank {
        for q in (0..=c).rev() {
            let mut acc = if q == c { 1.0 } else { 0.0 };
            for s in q + 1..=c {
                acc -= rr(q, s) * rinv[s * rank + c];
            }
            rinv[q * rank + c] = acc / rr(q, q);
        }
    }

    let mut coefficients = vec![0.0; k];
    for (q, &j) in kept.iter().enumerate() {
        coefficients[j] = beta_s[q] / scale[j];
    }
    let residuals: Vec<f64> = (0..n)
        .map(|i| target[i] - x.row(i).iter().zip(&coefficients).map(|(xv, b)| xv * b).sum::<f64>())
        .collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = target.iter().sum::<f64>() / n as f64;
    let sst: f64 = target.iter().map(|y| (y - mean) * (y - mean)).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };

    let df_resid = n - rank;
    let sigma2 = if df_resid > 0 { ssr / df_resid as f64 } else { f64::NAN };
    let mut std_errors = vec![f64::NAN; k];
    for (q, &j) in kept.iter().enumerate() {
        let row_norm2: f64 = (q..rank).map(|c| rinv[q * rank + c] * rinv[q * rank + c]).sum();
        std_errors[j] = libm::sqrt(sigma2 * row_norm2) / scale[j];
    }
    let t_stats: Vec<f64> = coefficients.iter().zip(&std_errors).map(|(b, se)| b / se).collect();
    let p_values = t_stats
        .iter()
        .map(|&t| if t.is_nan() || df_resid == 0 { f64::NAN } else { student_t_two_sided_p(t, df_resid as f64) })
        .collect();

    Ok(RegressionFit {
        spec: None,
        columns: x.names.clone(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        residuals,
        r_squared,
        n_observations: n,
        df_resid,
        dropped: dropped.into_iter().map(|j| x.names[j].to_string()).collect(),
    })
}
