//! Log-log rate fits over logged metric rows.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::record::Row;

/// Minimum number of rows inside a fitting window.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    ObjProxy,
    ConsViolation,
    TrackingErr,
}

impl Column {
    pub fn as_str(self) -> &'static str {
        match self {
            Column::ObjProxy => "obj_proxy",
            Column::ConsViolation => "cons_violation",
            Column::TrackingErr => "tracking_err",
        }
    }

    pub fn value(self, row: &Row) -> Option<f64> {
        match self {
            Column::ObjProxy => Some(row.obj_proxy),
            Column::ConsViolation => Some(row.cons_violation),
            Column::TrackingErr => row.tracking_err,
        }
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obj_proxy" => Ok(Column::ObjProxy),
            "cons_violation" => Ok(Column::ConsViolation),
            "tracking_err" => Ok(Column::TrackingErr),
            _ => Err(Error::InvalidParameter(format!("cannot fit column '{s}'"))),
        }
    }
}

/// Least-squares slope of `log(column)` against `log(k)` over rows with
/// `k_min <= k <= k_max`. Rows without a value in `column` are skipped.
pub fn fit_loglog_slope(rows: &[Row], k_min: usize, k_max: usize, column: Column) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.k >= k_min && r.k <= k_max)
        .filter_map(|r| column.value(r).map(|v| (r.k as f64, v)))
        .collect();
    loglog_slope(&pts)
}

/// Slope of the least-squares line through `(log x, log y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: points.len(),
        });
    }
    if let Some(&(_, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::NonPositiveValues(y));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all points share one k".into()));
    }
    Ok(sxy / sxx)
}

/// Pointwise mean of `column` across records logged at identical `k`.
/// Rows are matched by position; a `k` mismatch is an error.
pub fn mean_curve(rows: &[&[Row]], column: Column) -> Result<Vec<(f64, f64)>> {
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(first.len());
    for (i, r0) in first.iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for series in rows {
            let r = series
                .get(i)
                .filter(|r| r.k == r0.k)
                .ok_or_else(|| Error::InvalidParameter(format!("records disagree on logged k at row {i}")))?;
            if let Some(v) = column.value(r) {
                sum += v;
                count += 1;
            }
        }
        if count > 0 {
            out.push((r0.k as f64, sum / count as f64));
        }
    }
    Ok(out)
}
