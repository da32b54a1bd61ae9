//! Orthonormal 2-D projection frames and geodesic paths between them.

use nalgebra::{DMatrix, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `p × 2` matrix with orthonormal columns, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBasis {
    pub p: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourPath {
    pub frames: Vec<ProjectionBasis>,
    pub steps_per_segment: usize,
}

impl ProjectionBasis {
    pub fn from_columns(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let values = a.iter().zip(b).flat_map(|(&x, &y)| [x, y]).collect();
        Ok(Self { p: a.len(), values })
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.p).map(|i| self.values[2 * i + k]).collect()
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.p, 2, &self.values)
    }

    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let p = m.nrows();
        let values = (0..p).flat_map(|i| [m[(i, 0)], m[(i, 1)]]).collect();
        Self { p, values }
    }

    /// Largest deviation of the columns from orthonormality.
    pub fn orthonormality_error(&self) -> f64 {
        let (a, b) = (self.column(0), self.column(1));
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>();
        let na = dot(&a, &a).sqrt();
        let nb = dot(&b, &b).sqrt();
        (na - 1.0).abs().max((nb - 1.0).abs()).max(dot(&a, &b).abs())
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    norm
}

fn orthonormalize(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
    if normalize(&mut a) < 1e-12 {
        return None;
    }
    // two Gram-Schmidt passes keep the residual dot product near machine epsilon
    for _ in 0..2 {
        let d: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        b.iter_mut().zip(&a).for_each(|(y, x)| *y -= d * x);
    }
    if normalize(&mut b) < 1e-12 {
        return None;
    }
    Some((a, b))
}

/// Random 2-D frame in `p` dimensions from Gaussian directions.
pub fn random_basis(p: usize, seed: u64) -> Result<ProjectionBasis> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!(
            "projection needs p >= 2, got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some((a, b)) = orthonormalize(a, b) {
            return ProjectionBasis::from_columns(&a, &b);
        }
    }
}

/// Frames along the geodesic between the planes spanned by `start` and `end`.
///
/// Returns `steps + 1` frames; the first and last are the inputs themselves
/// and the planes in between rotate at constant principal-angle speed.
pub fn geodesic_path(start: &ProjectionBasis, end: &ProjectionBasis, steps: usize) -> Result<TourPath> {
    if start.p != end.p {
        return Err(Error::DimensionMismatch {
            expected: start.p,
            got: end.p,
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let fa = start.to_matrix();
    let fz = end.to_matrix();
    let cross: Matrix2<f64> = {
        let m = fa.transpose() * &fz;
        Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    };
    let svd = cross.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let u_d = DMatrix::from_column_slice(2, 2, u.as_slice());
    let v_d = DMatrix::from_column_slice(2, 2, v_t.transpose().as_slice());
    let a_rot = &fa * &u_d;
    let z_rot = &fz * &v_d;

    let mut angles = [0.0; 2];
    let mut towards = DMatrix::zeros(start.p, 2);
    for k in 0..2 {
        let cos = svd.singular_values[k].clamp(-1.0, 1.0);
        angles[k] = cos.acos();
        let mut g: Vec<f64> = (0..start.p)
            .map(|i| z_rot[(i, k)] - cos * a_rot[(i, k)])
            .collect();
        if angles[k] > 1e-12 {
            // re-orthogonalize against the start plane before normalizing
            for j in 0..2 {
                let d: f64 = (0..start.p).map(|i| g[i] * a_rot[(i, j)]).sum();
                g.iter_mut().enumerate().for_each(|(i, x)| *x -= d * a_rot[(i, j)]);
            }
            if normalize(&mut g) > 0.0 {
                for i in 0..start.p {
                    towards[(i, k)] = g[i];
                }
            }
        } else {
            angles[k] = 0.0;
        }
    }

    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(start.clone());
    let u_t = u_d.transpose();
    for s in 1..steps {
        let t = s as f64 / steps as f64;
        let mut f = DMatrix::zeros(start.p, 2);
        for k in 0..2 {
            let (c, sn) = ((t * angles[k]).cos(), (t * angles[k]).sin());
            for i in 0..start.p {
                f[(i, k)] = c * a_rot[(i, k)] + sn * towards[(i, k)];
            }
        }
        frames.push(ProjectionBasis::from_matrix(&(f * &u_t)));
    }
    frames.push(end.clone());
    Ok(TourPath {
        frames,
        steps_per_segment: steps,
    })
}

/// Seeded sequence of `anchors` random frames joined by geodesics.
pub fn tour_path(p: usize, anchors: usize, steps: usize, seed: u64) -> Result<TourPath> {
    if anchors < 1 {
        return Err(Error::InvalidParameter("a tour needs at least one frame".into()));
    }
    let bases = anchor_bases(p, anchors, seed)?;
    let mut frames = vec![bases[0].clone()];
    for w in bases.windows(2) {
        let seg = geodesic_path(&w[0], &w[1], steps)?;
        frames.extend(seg.frames.into_iter().skip(1));
    }
    Ok(TourPath {
        frames,
        steps_per_segment: steps,
    })
}

/// The `count` seeded random frames a tour passes through.
pub fn anchor_bases(p: usize, count: usize, seed: u64) -> Result<Vec<ProjectionBasis>> {
    (0..count as u64)
        .map(|k| random_basis(p, seed.wrapping_add(k)))
        .collect()
}

/// Projects a row-major `rows × p` matrix onto a frame, giving `rows` 2-D points.
pub fn project(values: &[f64], p: usize, basis: &ProjectionBasis) -> Result<Vec<[f64; 2]>> {
    if basis.p != p || p == 0 || !values.len().is_multiple_of(p) {
        return Err(Error::DimensionMismatch {
            expected: basis.p,
            got: p,
        });
    }
    Ok(values
        .chunks_exact(p)
        .map(|row| {
            let mut out = [0.0; 2];
            for (i, x) in row.iter().enumerate() {
                out[0] += x * basis.values[2 * i];
                out[1] += x * basis.values[2 * i + 1];
            }
            out
        })
        .collect())
}
