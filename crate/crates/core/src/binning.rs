//! Nearest-centroid assignment of layout points to hexagon bins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexgrid::HexGrid;
use crate::scaling::ScaledLayout;

/// How an occupied bin is represented in the 2-D model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    /// The hexagon's lattice centroid.
    #[default]
    Lattice,
    /// The mean of the layout points that fell into the bin.
    MemberMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    /// Bin index (into the grid) of each observation.
    pub assignment: Vec<usize>,
    /// Observation count of every grid bin, length `b`.
    pub counts: Vec<usize>,
    /// Indices of bins with a nonzero count, ascending.
    pub occupied: Vec<usize>,
}

impl Binning {
    pub fn from_assignment(assignment: Vec<usize>, bins: usize) -> Result<Self> {
        let mut counts = vec![0usize; bins];
        for &h in &assignment {
            if h >= bins {
                return Err(Error::InvalidParameter(format!(
                    "bin index {h} out of range for {bins} bins"
                )));
            }
            counts[h] += 1;
        }
        let occupied = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(h, _)| h)
            .collect();
        Ok(Self {
            assignment,
            counts,
            occupied,
        })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Number of bins in the grid, `b`.
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Number of occupied bins, `m`.
    pub fn m(&self) -> usize {
        self.occupied.len()
    }

    /// Standardized counts `n_h / n` of the occupied bins, in `occupied` order.
    pub fn std_counts(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.occupied
            .iter()
            .map(|&h| self.counts[h] as f64 / n)
            .collect()
    }

    /// Members of every occupied bin, in `occupied` order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut slot = vec![usize::MAX; self.bins()];
        for (k, &h) in self.occupied.iter().enumerate() {
            slot[h] = k;
        }
        let mut out: Vec<Vec<usize>> = self
            .occupied
            .iter()
            .map(|&h| Vec::with_capacity(self.counts[h]))
            .collect();
        for (i, &h) in self.assignment.iter().enumerate() {
            out[slot[h]].push(i);
        }
        out
    }
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Nearest lattice centroid to `pt`, ties going to the lowest bin index.
///
/// Only a small window of rows and columns around the point is searched; the
/// nearest centroid of any point inside the lattice rectangle is closer than
/// `0.67 * a1`, well inside that window.
pub fn nearest_bin(grid: &HexGrid, pt: [f64; 2]) -> usize {
    let row_f = ((pt[1] - grid.s2) / grid.a2).floor();
    let r_lo = (row_f as i64 - 1).max(0) as usize;
    let r_hi = ((row_f as i64 + 2).max(0) as usize).min(grid.b2 - 1);
    let mut best = (f64::INFINITY, usize::MAX);
    for r in r_lo..=r_hi {
        let shift = if r % 2 == 1 { grid.a1 / 2.0 } else { 0.0 };
        let col_f = ((pt[0] - grid.s1 - shift) / grid.a1).round() as i64;
        let c_lo = (col_f - 2).max(0) as usize;
        let c_hi = ((col_f + 2).max(0) as usize).min(grid.b1 - 1);
        for c in c_lo..=c_hi {
            let h = r * grid.b1 + c;
            let d = dist2(pt, grid.centroid(h));
            if d < best.0 || (d == best.0 && h < best.1) {
                best = (d, h);
            }
        }
    }
    best.1
}

pub fn assign_bins(layout: &ScaledLayout, grid: &HexGrid) -> Result<Binning> {
    let assignment = layout
        .points
        .par_iter()
        .enumerate()
        .map(|(row, &pt)| {
            if grid.covers(pt) {
                Ok(nearest_bin(grid, pt))
            } else {
                Err(Error::OutsideGrid { row })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Binning::from_assignment(assignment, grid.len())
}

/// 2-D representative point of every occupied bin, in `occupied` order.
pub fn bin_centers_2d(
    binning: &Binning,
    grid: &HexGrid,
    layout: &ScaledLayout,
    mode: CenterMode,
) -> Result<Vec<[f64; 2]>> {
    if binning.m() == 0 {
        return Err(Error::EmptyBinning);
    }
    match mode {
        CenterMode::Lattice => Ok(binning.occupied.iter().map(|&h| grid.centroid(h)).collect()),
        CenterMode::MemberMean => {
            if layout.len() != binning.n() {
                return Err(Error::RowMismatch {
                    data: binning.n(),
                    layout: layout.len(),
                });
            }
            Ok(binning
                .members()
                .iter()
                .map(|rows| {
                    let mut acc = [0.0, 0.0];
                    for &i in rows {
                        acc[0] += layout.points[i][0];
                        acc[1] += layout.points[i][1];
                    }
                    let k = rows.len() as f64;
                    [acc[0] / k, acc[1] / k]
                })
                .collect())
        }
    }
}
