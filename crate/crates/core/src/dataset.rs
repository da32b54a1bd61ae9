//! The p-dimensional observations that a layout is evaluated against.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// An n×p matrix of finite observations, stored row-major.
///
/// Row order is the join key with layouts: row `i` of the dataset and row
/// `i` of a layout describe the same observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(values: Vec<f64>, n: usize, column_names: Vec<String>) -> Result<Self> {
        let p = column_names.len();
        if p < 2 {
            return Err(Error::InvalidParameter(format!(
                "dataset needs at least 2 columns, got {p}"
            )));
        }
        if n < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: n });
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / p,
                column: pos % p,
            });
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate column name {name:?}"
                )));
            }
        }
        Ok(Self {
            n,
            p,
            values,
            column_names,
        })
    }

    /// Builds a dataset from rows, naming columns `x1..xp`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Ragged {
                    path: "<memory>".into(),
                    row: i,
                    expected: p,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        Self::new(values, rows.len(), names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Column means of the whole dataset.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.p];
        for row in self.rows() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= self.n as f64);
        acc
    }

    /// Returns a copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: order.len(),
            });
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Self::new(values, self.n, self.column_names.clone())
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
