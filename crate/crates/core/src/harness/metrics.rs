// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::trace::{SimTrace, TraceRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Maximum absolute error (m).
    pub mae: f64,
    /// Mean absolute error (m).
    pub iae: f64,
    pub window: (f64, f64),
    pub sup_sq: f64,
    pub samples: usize,
}

pub fn metrics(trace: &SimTrace, window: (f64, f64)) -> Result<MetricsReport> {
    let rows = trace.window(window.0, window.1);
    metrics_of(rows, window)
}

pub fn metrics_of(rows: &[TraceRow], window: (f64, f64)) -> Result<MetricsReport> {
    if rows.is_empty() {
        return Err(Error::Domain(format!(
            "metrics window [{}, {}] contains no samples",
            window.0, window.1
        )));
    }
    let mut mae = 0.0f64;
    let mut sum = 0.0;
    let mut sup_sq = 0.0f64;
    for r in rows {
        let e = r.abs_error();
        mae = mae.max(e);
        sum += e;
        sup_sq = sup_sq.max(r.sq.abs());
    }
    Ok(MetricsReport {
        mae,
        iae: sum / rows.len() as f64,
        window,
        sup_sq,
        samples: rows.len(),
    })
}
