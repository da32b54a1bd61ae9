//! The wireframe model: occupied bin centroids in the layout and in the data
//! space, joined by Delaunay edges.

use crate::binning::Binning;
use crate::dataset::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::triangulation::{neighbor_edges, EdgeList};

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedModel {
    /// Grid indices of the bins in the model, ascending.
    pub bin_ids: Vec<usize>,
    pub centroids2d: Vec<[f64; 2]>,
    /// Row-major `m × p` matrix of bin means in data units.
    pub centroids_pd: Vec<f64>,
    pub counts: Vec<usize>,
    pub edges: EdgeList,
    pub p: usize,
    /// Standardized-count threshold used to drop bins, 0 when none were dropped.
    pub cutoff: f64,
}

impl LiftedModel {
    pub fn m(&self) -> usize {
        self.bin_ids.len()
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn centroid_pd(&self, k: usize) -> &[f64] {
        &self.centroids_pd[k * self.p..(k + 1) * self.p]
    }

    /// Model row of a grid bin, if the bin is part of the model.
    pub fn row_of(&self, bin: usize) -> Option<usize> {
        self.bin_ids.binary_search(&bin).ok()
    }

    pub fn std_counts(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

fn bin_means(binning: &Binning, data: &Dataset) -> Vec<f64> {
    let p = data.p();
    let members = binning.members();
    let mut out = Vec::with_capacity(members.len() * p);
    for rows in &members {
        let mut acc = vec![0.0; p];
        for &i in rows {
            for (a, v) in acc.iter_mut().zip(data.row(i)) {
                *a += v;
            }
        }
        let k = rows.len() as f64;
        out.extend(acc.into_iter().map(|a| a / k));
    }
    out
}

/// Lifts occupied bins into the data space by averaging their members.
///
/// `centers2d` holds one 2-D point per occupied bin, in `binning.occupied` order.
pub fn lift(binning: &Binning, data: &Dataset, centers2d: &[[f64; 2]]) -> Result<LiftedModel> {
    if binning.m() == 0 {
        return Err(Error::EmptyBinning);
    }
    if binning.n() != data.n() {
        return Err(Error::RowMismatch {
            data: data.n(),
            layout: binning.n(),
        });
    }
    if centers2d.len() != binning.m() {
        return Err(Error::DimensionMismatch {
            expected: binning.m(),
            got: centers2d.len(),
        });
    }
    Ok(LiftedModel {
        bin_ids: binning.occupied.clone(),
        centroids2d: centers2d.to_vec(),
        centroids_pd: bin_means(binning, data),
        counts: binning.occupied.iter().map(|&h| binning.counts[h]).collect(),
        edges: neighbor_edges(centers2d)?,
        p: data.p(),
        cutoff: 0.0,
    })
}

/// Drops bins whose standardized count is at most `cutoff`.
///
/// Members of a dropped bin move, as a group, to the surviving bin whose 2-D
/// centroid is nearest to the dropped bin's centroid (ties to the lowest bin
/// index). Data-space means and edges are then recomputed from the survivors.
pub fn remove_low_count(
    model: &LiftedModel,
    binning: &Binning,
    data: &Dataset,
    cutoff: f64,
) -> Result<(LiftedModel, Binning)> {
    if !cutoff.is_finite() || cutoff < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be a nonnegative number, got {cutoff}"
        )));
    }
    if model.bin_ids != binning.occupied {
        return Err(Error::InvalidParameter(
            "model and binning describe different bins".into(),
        ));
    }
    let n = binning.n() as f64;
    let keep: Vec<usize> = (0..model.m())
        .filter(|&k| model.counts[k] as f64 / n > cutoff)
        .collect();
    if keep.is_empty() {
        return Err(Error::AllBinsRemoved { cutoff });
    }
    if keep.len() == model.m() {
        let mut same = model.clone();
        same.cutoff = cutoff;
        return Ok((same, binning.clone()));
    }

    let mut target = vec![usize::MAX; binning.bins()];
    for k in 0..model.m() {
        let from = model.centroids2d[k];
        let best = keep
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = squared_distance(&from, &model.centroids2d[a]);
                let db = squared_distance(&from, &model.centroids2d[b]);
                da.total_cmp(&db).then(model.bin_ids[a].cmp(&model.bin_ids[b]))
            })
            .expect("at least one bin survives");
        target[model.bin_ids[k]] = model.bin_ids[best];
    }
    let assignment = binning.assignment.iter().map(|&h| target[h]).collect();
    let reduced = Binning::from_assignment(assignment, binning.bins())?;
    let centers: Vec<[f64; 2]> = keep.iter().map(|&k| model.centroids2d[k]).collect();
    let mut lifted = lift(&reduced, data, &centers)?;
    lifted.cutoff = cutoff;
    Ok((lifted, reduced))
}
