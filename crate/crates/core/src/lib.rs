//! Evaluate 2-D embedding layouts by lifting them into the data space.
//!
//! A layout is covered by a hexagon grid, each observation is assigned to its
//! nearest hexagon, and occupied hexagons are joined by Delaunay edges. Each
//! hexagon is then given the mean of its members in the original space, which
//! turns the layout into a wireframe model that can be overlaid on the data.
//! Distances from observations to their hexagon's mean are the residuals, and
//! their root mean square is the hexbin error (HBE): lower is a better layout.

pub mod binning;
pub mod bundle;
pub mod compare;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod hexgrid;
pub mod io;
pub mod metrics;
pub mod model;
pub mod scaling;
pub mod simdata;
pub mod tour;
pub mod triangulation;
pub mod tuning;

pub use binning::{assign_bins, bin_centers_2d, Binning, CenterMode};
pub use dataset::Dataset;
pub use diagnostics::{predict_2d, residuals, ResidualSet};
pub use error::{Error, Result};
pub use fit::{fit_layout, Fit, FitParams};
pub use hexgrid::{build_grid, compute_b2, GridConfig, HexGrid};
pub use metrics::{build_metric_table, random_triplet_accuracy, shepard_spearman, MetricTable};
pub use model::{lift, remove_low_count, LiftedModel};
pub use scaling::{scale_layout, RawLayout, ScaledLayout};
pub use triangulation::{triangulate, EdgeList};
pub use tuning::{sweep_b1, sweep_cutoff, TuningRecord};
