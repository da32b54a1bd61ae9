//! The full model-fitting pipeline for one layout: grid, binning, lift,
//! optional low-count removal, residuals.

use serde::{Deserialize, Serialize};

use crate::binning::{assign_bins, bin_centers_2d, Binning, CenterMode};
use crate::dataset::Dataset;
use crate::diagnostics::{residuals, ResidualSet};
use crate::error::{Error, Result};
use crate::hexgrid::{build_grid, default_b1, GridConfig, HexGrid, DEFAULT_BUFFER};
use crate::model::{lift, remove_low_count, LiftedModel};
use crate::scaling::ScaledLayout;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// Hexagons along the first axis; `None` picks the cube-root default.
    pub b1: Option<usize>,
    pub q: f64,
    pub cutoff: f64,
    pub center_mode: CenterMode,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            b1: None,
            q: DEFAULT_BUFFER,
            cutoff: 0.0,
            center_mode: CenterMode::Lattice,
        }
    }
}

impl FitParams {
    pub fn with_b1(self, b1: usize) -> Self {
        Self { b1: Some(b1), ..self }
    }

    pub fn with_cutoff(self, cutoff: f64) -> Self {
        Self { cutoff, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub grid: HexGrid,
    /// Membership after any low-count removal.
    pub binning: Binning,
    /// Number of occupied bins before removal.
    pub occupied_before_removal: usize,
    pub model: LiftedModel,
    pub residuals: ResidualSet,
}

pub fn fit_layout(data: &Dataset, layout: &ScaledLayout, params: &FitParams) -> Result<Fit> {
    if data.n() != layout.len() {
        return Err(Error::RowMismatch {
            data: data.n(),
            layout: layout.len(),
        });
    }
    let b1 = params.b1.unwrap_or_else(|| default_b1(data.n()));
    let grid = build_grid(&GridConfig::new(b1, params.q, layout.r2)?)?;
    let binning = assign_bins(layout, &grid)?;
    let centers = bin_centers_2d(&binning, &grid, layout, params.center_mode)?;
    let model = lift(&binning, data, &centers)?;
    let occupied_before_removal = binning.m();
    let (model, binning) = if params.cutoff > 0.0 {
        remove_low_count(&model, &binning, data, params.cutoff)?
    } else {
        (model, binning)
    };
    let residuals = residuals(data, &model, &binning)?;
    Ok(Fit {
        grid,
        binning,
        occupied_before_removal,
        model,
        residuals,
    })
}
