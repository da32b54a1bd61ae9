//! Residuals, hexbin error, and prediction of layout positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::Binning;
use crate::dataset::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::model::LiftedModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSet {
    /// Data-space distance of each observation to its bin's centroid.
    pub e: Vec<f64>,
    /// Root mean squared residual.
    pub hbe: f64,
}

/// Pairwise (cascade) summation; the split points depend only on the length,
/// so results are identical however the terms were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn residuals(data: &Dataset, model: &LiftedModel, binning: &Binning) -> Result<ResidualSet> {
    if data.p() != model.p {
        return Err(Error::DimensionMismatch {
            expected: model.p,
            got: data.p(),
        });
    }
    if data.n() != binning.n() {
        return Err(Error::RowMismatch {
            data: data.n(),
            layout: binning.n(),
        });
    }
    let squared: Vec<f64> = (0..data.n())
        .into_par_iter()
        .map(|i| {
            let bin = binning.assignment[i];
            let k = model.row_of(bin).ok_or_else(|| {
                Error::InvalidParameter(format!("observation {i} is in bin {bin}, which the model lacks"))
            })?;
            Ok(squared_distance(data.row(i), model.centroid_pd(k)))
        })
        .collect::<Result<_>>()?;
    let hbe = (pairwise_sum(&squared) / data.n() as f64).sqrt();
    let e = squared.into_iter().map(f64::sqrt).collect();
    Ok(ResidualSet { e, hbe })
}

/// Index of the model bin whose data-space centroid is nearest to `x`,
/// ties going to the lowest bin id.
pub fn nearest_model_bin(x: &[f64], model: &LiftedModel) -> Result<usize> {
    if x.len() != model.p {
        return Err(Error::DimensionMismatch {
            expected: model.p,
            got: x.len(),
        });
    }
    if let Some(column) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, column });
    }
    if model.m() == 0 {
        return Err(Error::EmptyBinning);
    }
    let mut best = (f64::INFINITY, 0);
    for k in 0..model.m() {
        let d = squared_distance(x, model.centroid_pd(k));
        // bin ids ascend with k, so strict comparison keeps the lowest id on ties
        if d < best.0 {
            best = (d, k);
        }
    }
    Ok(best.1)
}

/// Layout position of a new observation: the 2-D centroid of its nearest data-space centroid.
pub fn predict_2d(x: &[f64], model: &LiftedModel) -> Result<[f64; 2]> {
    Ok(model.centroids2d[nearest_model_bin(x, model)?])
}
