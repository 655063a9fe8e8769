//! Slow, independent reference implementations used to check the pipeline.

use std::collections::{BTreeMap, BTreeSet};

use mobimetrics_core::calendar::month_of;
use mobimetrics_core::{GeoPoint, MonthId, PositioningRecord};

/// Solves `(X'X) b = X'y` by Gaussian elimination with partial pivoting.
/// `None` when the normal matrix is singular.
pub fn oracle_ols(target: &[f64], rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = rows.first()?.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, y) in rows.iter().zip(target) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * y;
        }
    }
    let scale = a.iter().flat_map(|r| r[..k].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..k {
        let pivot = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut b = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * b[j]).sum();
        b[i] = (a[i][k] - s) / a[i][i];
    }
    Some(b)
}

/// Winding number of a closed polygon around `p`; non-zero means inside.
/// Unreliable for points on the boundary.
pub fn winding_number(vertices: &[GeoPoint], p: GeoPoint) -> i32 {
    let n = vertices.len();
    let mut wn = 0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let cross = (b.lon - a.lon) * (p.lat - a.lat) - (p.lon - a.lon) * (b.lat - a.lat);
        if a.lat <= p.lat {
            if b.lat > p.lat && cross > 0.0 {
                wn += 1;
            }
        } else if b.lat <= p.lat && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn oracle_pip(vertices: &[GeoPoint], p: GeoPoint) -> bool {
    winding_number(vertices, p) != 0
}

/// Users with a record in each of the 13 months ending at `report`, checked
/// one month at a time.
pub fn oracle_cohort(records: &[PositioningRecord], report: MonthId) -> BTreeSet<String> {
    let mut by_user: BTreeMap<&str, Vec<MonthId>> = BTreeMap::new();
    for r in records {
        by_user.entry(r.user_id.as_str()).or_default().push(month_of(r.timestamp));
    }
    by_user
        .into_iter()
        .filter(|(_, months)| (0..13).all(|back| months.contains(&report.add_months(-back))))
        .map(|(u, _)| u.to_string())
        .collect()
}
