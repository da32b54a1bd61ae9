//! Hexagon grid covering a scaled layout.
//!
//! Centroids form a row-offset lattice: row `r` sits at height `s2 + r*a2`
//! and odd rows are shifted right by half a hexagon width. Bins are numbered
//! row-major from the lower-left centroid, `index = r*b1 + c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BUFFER: f64 = 0.1;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub b1: usize,
    /// Buffer around the data as a proportion of the range.
    pub q: f64,
    pub r2: f64,
}

impl GridConfig {
    pub fn new(b1: usize, q: f64, r2: f64) -> Result<Self> {
        let config = Self { b1, q, r2 };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.b1 < 2 {
            return Err(Error::InvalidParameter(format!(
                "b1 must be at least 2, got {}",
                self.b1
            )));
        }
        if !(self.q > 0.0 && self.q < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "buffer q must lie in (0, 0.5), got {}",
                self.q
            )));
        }
        if !(self.r2 > 0.0 && self.r2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r2 must be positive, got {}",
                self.r2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HexGrid {
    pub b1: usize,
    pub b2: usize,
    pub a1: f64,
    pub a2: f64,
    pub s1: f64,
    pub s2: f64,
    pub q: f64,
    pub r2: f64,
    centroids: Vec<[f64; 2]>,
}

/// Number of hexagon rows needed to cover `[0, r2]` once `b1` columns cover `[0, 1]`.
pub fn compute_b2(b1: usize, q: f64, r2: f64) -> Result<usize> {
    GridConfig::new(b1, q, r2)?;
    let numerator = 2.0 * (r2 + q * (1.0 + r2)) * (b1 - 1) as f64;
    let denominator = SQRT_3 * (1.0 + 2.0 * q);
    Ok((1.0 + numerator / denominator).ceil() as usize)
}

/// Horizontal spacing chosen for `b1` columns: the smallest width that still covers the buffer.
pub fn binwidth(b1: usize, q: f64) -> f64 {
    (1.0 + 2.0 * q) / (b1 - 1) as f64
}

/// Default column count, the smallest integer `b1` with `b1^3 >= n` (at least 2).
pub fn default_b1(n: usize) -> usize {
    let mut b1 = 1usize;
    while b1.pow(3) < n {
        b1 += 1;
    }
    b1.max(2)
}

/// Largest recommended column count, `ceil(sqrt(n / r2))`.
pub fn max_b1(n: usize, r2: f64) -> usize {
    ((n as f64 / r2).sqrt().ceil() as usize).max(2)
}

/// Column count whose binwidth is closest to `a1`.
pub fn b1_for_binwidth(a1: f64, q: f64) -> Result<usize> {
    if !(a1 > 0.0 && a1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "binwidth must be positive, got {a1}"
        )));
    }
    Ok(((1.0 + (1.0 + 2.0 * q) / a1).round() as usize).max(2))
}

pub fn build_grid(config: &GridConfig) -> Result<HexGrid> {
    config.validate()?;
    let GridConfig { b1, q, r2 } = *config;
    let b2 = compute_b2(b1, q, r2)?;
    let a1 = binwidth(b1, q);
    let a2 = SQRT_3 * a1 / 2.0;
    let (s1, s2) = (-q, -q * r2);

    let mut centroids = Vec::with_capacity(b1 * b2);
    for r in 0..b2 {
        let shift = if r % 2 == 1 { a1 / 2.0 } else { 0.0 };
        for c in 0..b1 {
            centroids.push([s1 + c as f64 * a1 + shift, s2 + r as f64 * a2]);
        }
    }
    Ok(HexGrid {
        b1,
        b2,
        a1,
        a2,
        s1,
        s2,
        q,
        r2,
        centroids,
    })
}

impl HexGrid {
    /// Total number of bins, `b1 * b2`.
    pub fn len(&self) -> usize {
        self.b1 * self.b2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centroids(&self) -> &[[f64; 2]] {
        &self.centroids
    }

    pub fn centroid(&self, index: usize) -> [f64; 2] {
        self.centroids[index]
    }

    /// `(row, column)` of a bin index.
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.b1, index % self.b1)
    }

    /// Whether a point lies inside the rectangle spanned by the centroid lattice.
    pub fn covers(&self, pt: [f64; 2]) -> bool {
        let x_max = self.s1 + (self.b1 - 1) as f64 * self.a1;
        let y_max = self.s2 + (self.b2 - 1) as f64 * self.a2;
        pt[0] >= self.s1 && pt[0] <= x_max && pt[1] >= self.s2 && pt[1] <= y_max
    }

    /// Corner vertices of the hexagon around bin `index` (pointy-top).
    pub fn hexagon(&self, index: usize) -> [[f64; 2]; 6] {
        let [cx, cy] = self.centroids[index];
        let radius = self.a1 / SQRT_3;
        let mut out = [[0.0; 2]; 6];
        for (k, v) in out.iter_mut().enumerate() {
            let angle = std::f64::consts::FRAC_PI_6 + k as f64 * std::f64::consts::FRAC_PI_3;
            *v = [cx + radius * angle.cos(), cy + radius * angle.sin()];
        }
        out
    }
}
