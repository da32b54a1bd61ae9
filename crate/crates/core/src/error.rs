use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("layout column {column} has zero range")]
    DegenerateColumn { column: usize },

    #[error("row {row} lies outside the hexagon grid")]
    OutsideGrid { row: usize },

    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row count mismatch: data has {data} rows, layout has {layout}")]
    RowMismatch { data: usize, layout: usize },

    #[error("binning has no occupied bins")]
    EmptyBinning,

    #[error("cutoff {cutoff} removes every bin")]
    AllBinsRemoved { cutoff: f64 },

    #[error("b1 values out of range [2, {max}]: {offenders:?}")]
    B1OutOfRange { offenders: Vec<usize>, max: usize },

    #[error("distance vector has zero variance")]
    ZeroVariance,

    #[error("{path}: missing header row")]
    MissingHeader { path: String },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row} has {got} fields, expected {expected}")]
    Ragged {
        path: String,
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("bundle: {0}")]
    Bundle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
