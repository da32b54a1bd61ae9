//! Normalizing raw embedding coordinates to the standard layout range.
//!
//! The wider axis is mapped onto `[0, 1]`. When the aspect ratio is kept the
//! other axis is mapped onto `[0, r2]` with `r2 = range2 / range1 <= 1`,
//! otherwise onto `[0, 1]` as well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedding coordinates in whatever units the NLDR method produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLayout {
    pub layout_id: String,
    pub points: Vec<[f64; 2]>,
}

impl RawLayout {
    pub fn new(layout_id: impl Into<String>, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TooFewPoints {
                needed: 3,
                got: points.len(),
            });
        }
        for (row, pt) in points.iter().enumerate() {
            for (column, v) in pt.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, column });
                }
            }
        }
        Ok(Self {
            layout_id: layout_id.into(),
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledLayout {
    pub layout_id: String,
    pub points: Vec<[f64; 2]>,
    /// Upper end of the second axis.
    pub r2: f64,
    pub preserve_ratio: bool,
    /// True when the raw axes were exchanged so the wider one comes first.
    pub swapped: bool,
    /// Raw-unit minimum of each scaled axis (scaled axis order).
    pub offset: [f64; 2],
    /// Raw-unit divisor of each scaled axis (scaled axis order).
    pub scale: [f64; 2],
}

impl ScaledLayout {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Maps a point in scaled coordinates back to the raw layout's units and axis order.
    pub fn to_raw(&self, pt: [f64; 2]) -> [f64; 2] {
        let a = pt[0] * self.scale[0] + self.offset[0];
        let b = pt[1] * self.scale[1] + self.offset[1];
        if self.swapped {
            [b, a]
        } else {
            [a, b]
        }
    }

    /// The same layout viewed as raw input, e.g. for rescaling.
    pub fn as_raw(&self) -> RawLayout {
        RawLayout {
            layout_id: self.layout_id.clone(),
            points: self.points.clone(),
        }
    }
}

fn column_range(points: &[[f64; 2]], k: usize) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p[k]), hi.max(p[k]))
    })
}

pub fn scale_layout(raw: &RawLayout, preserve_ratio: bool) -> Result<ScaledLayout> {
    let (min0, max0) = column_range(&raw.points, 0);
    let (min1, max1) = column_range(&raw.points, 1);
    let (range0, range1) = (max0 - min0, max1 - min1);
    for (column, range) in [(0, range0), (1, range1)] {
        if !range.is_finite() || range <= 0.0 {
            return Err(Error::DegenerateColumn { column });
        }
    }

    let swapped = range1 > range0;
    let (first, second) = if swapped { (1, 0) } else { (0, 1) };
    let mins = [min0, min1];
    let ranges = [range0, range1];
    let offset = [mins[first], mins[second]];
    let scale = if preserve_ratio {
        [ranges[first], ranges[first]]
    } else {
        [ranges[first], ranges[second]]
    };

    let points: Vec<[f64; 2]> = raw
        .points
        .iter()
        .map(|p| {
            [
                (p[first] - offset[0]) / scale[0],
                (p[second] - offset[1]) / scale[1],
            ]
        })
        .collect();
    let r2 = if preserve_ratio {
        ranges[second] / ranges[first]
    } else {
        1.0
    };

    Ok(ScaledLayout {
        layout_id: raw.layout_id.clone(),
        points,
        r2,
        preserve_ratio,
        swapped,
        offset,
        scale,
    })
}
