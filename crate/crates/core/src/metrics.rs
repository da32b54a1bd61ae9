//! Auxiliary layout-quality metrics and the normalized cross-layout table.
//!
//! Every column of the table is oriented so that lower is better: HBE as is,
//! random-triplet accuracy and Spearman correlation as `1 - value`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::fit::{fit_layout, FitParams};
use crate::hexgrid::{b1_for_binwidth, binwidth, DEFAULT_BUFFER};
use crate::scaling::ScaledLayout;

fn check_pair(data: &Dataset, layout: &ScaledLayout) -> Result<()> {
    if data.n() != layout.len() {
        return Err(Error::RowMismatch {
            data: data.n(),
            layout: layout.len(),
        });
    }
    if data.n() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: data.n(),
        });
    }
    Ok(())
}

fn dist_2d(a: [f64; 2], b: [f64; 2]) -> f64 {
    squared_distance(&a, &b).sqrt()
}

/// Fraction of random triplets `(i; j, k)` whose distance order from `i` is
/// the same in the data and in the layout.
pub fn random_triplet_accuracy(
    data: &Dataset,
    layout: &ScaledLayout,
    n_triplets: usize,
    seed: u64,
) -> Result<f64> {
    check_pair(data, layout)?;
    if n_triplets == 0 {
        return Err(Error::InvalidParameter("n_triplets must be positive".into()));
    }
    let n = data.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0usize;
    for _ in 0..n_triplets {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let mut k = rng.random_range(0..n - 2);
        if k >= lo {
            k += 1;
        }
        if k >= hi {
            k += 1;
        }
        let hd = squared_distance(data.row(i), data.row(j))
            .sqrt()
            .total_cmp(&squared_distance(data.row(i), data.row(k)).sqrt());
        let pts = &layout.points;
        let ld = dist_2d(pts[i], pts[j]).total_cmp(&dist_2d(pts[i], pts[k]));
        if hd == ld {
            agree += 1;
        }
    }
    Ok(agree as f64 / n_triplets as f64)
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let len = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / len, ry.iter().sum::<f64>() / len);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// `(i, j)` with `i < j` for the `k`-th pair in row-major upper-triangle order.
fn pair_at(k: usize, n: usize) -> (usize, usize) {
    // first index of row i is i*n - i*(i+1)/2
    let offset = |i: usize| i * n - i * (i + 1) / 2;
    let (mut lo, mut hi) = (0, n - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if offset(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, lo + 1 + (k - offset(lo)))
}

/// Spearman correlation between data-space and layout distances (Shepard diagram).
///
/// Uses every pair when there are at most `max_pairs`, otherwise a seeded
/// sample of `max_pairs` distinct pairs.
pub fn shepard_spearman(
    data: &Dataset,
    layout: &ScaledLayout,
    max_pairs: usize,
    seed: u64,
) -> Result<f64> {
    check_pair(data, layout)?;
    let n = data.n();
    let total = n * (n - 1) / 2;
    let pairs: Vec<(usize, usize)> = if total <= max_pairs {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        if max_pairs < 2 {
            return Err(Error::InvalidParameter("max_pairs must be at least 2".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, total, max_pairs).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|k| pair_at(k, n)).collect()
    };
    let high: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| squared_distance(data.row(i), data.row(j)).sqrt())
        .collect();
    let low: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| dist_2d(layout.points[i], layout.points[j]))
        .collect();
    spearman(&high, &low)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub q: f64,
    /// Triplets per layout; `None` means ten per observation.
    pub n_triplets: Option<usize>,
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            q: DEFAULT_BUFFER,
            n_triplets: None,
            max_pairs: 200_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub layout_id: String,
    pub hbe: f64,
    pub rta: f64,
    pub sc: f64,
    pub r_rta: f64,
    pub r_sc: f64,
    pub norm_hbe: f64,
    pub norm_r_rta: f64,
    pub norm_r_sc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub column: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    /// Binwidth actually used for the HBE column.
    pub a1: f64,
    pub b1: usize,
    pub rows: Vec<MetricRow>,
    pub normalization: Vec<ColumnRange>,
}

pub const SCORE_COLUMNS: [&str; 3] = ["hbe", "r_rta", "r_sc"];

/// Min-max scaling to `[0, 1]`; a constant column maps to all zeros.
fn min_max(values: &[f64]) -> (Vec<f64>, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let scaled = values
        .iter()
        .map(|v| if span > 0.0 { (v - min) / span } else { 0.0 })
        .collect();
    (scaled, min, max)
}

pub fn build_metric_table(
    layouts: &[ScaledLayout],
    data: &Dataset,
    reference_a1: f64,
    options: &MetricOptions,
) -> Result<MetricTable> {
    if layouts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 layouts to compare, got {}",
            layouts.len()
        )));
    }
    let b1 = b1_for_binwidth(reference_a1, options.q)?;
    let params = FitParams {
        q: options.q,
        ..FitParams::default()
    }
    .with_b1(b1);
    let n_triplets = options.n_triplets.unwrap_or(10 * data.n());

    let raw: Vec<(f64, f64, f64)> = layouts
        .par_iter()
        .map(|layout| {
            let hbe = fit_layout(data, layout, &params)?.residuals.hbe;
            let rta = random_triplet_accuracy(data, layout, n_triplets, options.seed)?;
            let sc = shepard_spearman(data, layout, options.max_pairs, options.seed)?;
            Ok((hbe, rta, sc))
        })
        .collect::<Result<_>>()?;

    let hbe: Vec<f64> = raw.iter().map(|r| r.0).collect();
    let r_rta: Vec<f64> = raw.iter().map(|r| 1.0 - r.1).collect();
    let r_sc: Vec<f64> = raw.iter().map(|r| 1.0 - r.2).collect();
    let mut normalization = Vec::new();
    let mut scaled = Vec::new();
    for (name, column) in SCORE_COLUMNS.iter().zip([&hbe, &r_rta, &r_sc]) {
        let (s, min, max) = min_max(column);
        normalization.push(ColumnRange {
            column: name.to_string(),
            min,
            max,
        });
        scaled.push(s);
    }
    let rows = layouts
        .iter()
        .enumerate()
        .map(|(k, layout)| MetricRow {
            layout_id: layout.layout_id.clone(),
            hbe: hbe[k],
            rta: raw[k].1,
            sc: raw[k].2,
            r_rta: r_rta[k],
            r_sc: r_sc[k],
            norm_hbe: scaled[0][k],
            norm_r_rta: scaled[1][k],
            norm_r_sc: scaled[2][k],
        })
        .collect();
    Ok(MetricTable {
        a1: binwidth(b1, options.q),
        b1,
        rows,
        normalization,
    })
}
