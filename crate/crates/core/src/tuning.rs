//! Parameter sweeps over the hexagon count and the low-count cutoff.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::{fit_layout, FitParams};
use crate::hexgrid::max_b1;
use crate::scaling::ScaledLayout;

pub const DEFAULT_CUTOFFS: [f64; 5] = [0.0, 0.001, 0.002, 0.005, 0.01];
pub const DEFAULT_SWEEP_POINTS: usize = 12;

/// One fitted model's summary. Field order is the column order of `tuning.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    pub layout_id: String,
    pub b1: usize,
    pub b2: usize,
    pub b: usize,
    pub m: usize,
    pub a1: f64,
    pub mean_count: f64,
    pub mean_std_count: f64,
    pub nonempty_frac: f64,
    pub cutoff: f64,
    pub hbe: f64,
}

pub const TUNING_COLUMNS: [&str; 11] = [
    "layout_id",
    "b1",
    "b2",
    "b",
    "m",
    "a1",
    "mean_count",
    "mean_std_count",
    "nonempty_frac",
    "cutoff",
    "hbe",
];

/// `points` log-spaced column counts from 2 up to `ceil(sqrt(n / r2))`, deduplicated.
pub fn default_b1_grid(n: usize, r2: f64, points: usize) -> Vec<usize> {
    let hi = max_b1(n, r2) as f64;
    let lo = 2f64;
    let steps = points.max(2) - 1;
    let grid: BTreeSet<usize> = (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as usize
        })
        .collect();
    grid.into_iter().collect()
}

pub fn record(
    data: &Dataset,
    layout: &ScaledLayout,
    b1: usize,
    cutoff: f64,
    template: &FitParams,
) -> Result<TuningRecord> {
    let params = template.with_b1(b1).with_cutoff(cutoff);
    let fit = fit_layout(data, layout, &params)?;
    let m = fit.model.m();
    let b = fit.grid.len();
    let w_sum: f64 = fit.model.std_counts().iter().sum();
    Ok(TuningRecord {
        layout_id: layout.layout_id.clone(),
        b1,
        b2: fit.grid.b2,
        b,
        m,
        a1: fit.grid.a1,
        mean_count: fit.model.n() as f64 / m as f64,
        mean_std_count: w_sum / m as f64,
        nonempty_frac: m as f64 / b as f64,
        cutoff,
        hbe: fit.residuals.hbe,
    })
}

fn checked_b1_set(n: usize, r2: f64, b1_values: &[usize]) -> Result<Vec<usize>> {
    let max = max_b1(n, r2);
    let offenders: Vec<usize> = b1_values
        .iter()
        .copied()
        .filter(|&b1| !(2..=max).contains(&b1))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !offenders.is_empty() {
        return Err(Error::B1OutOfRange { offenders, max });
    }
    if b1_values.is_empty() {
        return Err(Error::InvalidParameter("no b1 values to sweep".into()));
    }
    Ok(b1_values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect())
}

fn sort_records(records: &mut [TuningRecord]) {
    records.sort_by(|x, y| {
        x.a1.total_cmp(&y.a1)
            .then(x.cutoff.total_cmp(&y.cutoff))
            .then(x.layout_id.cmp(&y.layout_id))
    });
}

/// Fits the layout once per distinct `b1`, records sorted by binwidth.
pub fn sweep_b1(
    data: &Dataset,
    layout: &ScaledLayout,
    b1_values: &[usize],
    cutoff: f64,
    template: &FitParams,
) -> Result<Vec<TuningRecord>> {
    sweep_cutoff(data, layout, b1_values, &[cutoff], template)
}

/// Every `(b1, cutoff)` combination; cutoffs must be ascending and nonnegative.
pub fn sweep_cutoff(
    data: &Dataset,
    layout: &ScaledLayout,
    b1_values: &[usize],
    cutoffs: &[f64],
    template: &FitParams,
) -> Result<Vec<TuningRecord>> {
    let b1_set = checked_b1_set(data.n(), layout.r2, b1_values)?;
    if cutoffs.is_empty() {
        return Err(Error::InvalidParameter("no cutoffs to sweep".into()));
    }
    if cutoffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoffs must be nonnegative: {cutoffs:?}"
        )));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "cutoffs must be strictly ascending: {cutoffs:?}"
        )));
    }
    let jobs: Vec<(usize, f64)> = b1_set
        .iter()
        .flat_map(|&b1| cutoffs.iter().map(move |&c| (b1, c)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(b1, cutoff)| record(data, layout, b1, cutoff, template))
        .collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);
    Ok(records)
}
