//! Synthetic benchmark data: two separated nonlinear clusters in seven dimensions.
//!
//! Cluster A is a saddle-shaped sheet parameterized by `(u, v)`:
//! `(u, v, u^2 - v^2, 0.1*u*v)`. Cluster B is a curved solid parameterized by
//! `(a, b, c)`: `(a + separation, b, c, 0.5*(a^2 + b^2 + c^2))`. All parameters
//! are uniform on `[-1, 1]`. Dimensions 5 to 7 are Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DIMENSIONS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_cluster: usize,
    pub noise_sd: f64,
    pub separation: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_per_cluster: 1000,
            noise_sd: 0.05,
            separation: 3.0,
            seed: 0,
        }
    }
}

/// Generates the data and a cluster label per row (0 for the sheet, 1 for the solid).
pub fn gen_2nc7(spec: &SyntheticSpec) -> Result<(Dataset, Vec<u8>)> {
    if spec.n_per_cluster < 10 {
        return Err(Error::InvalidParameter(format!(
            "n_per_cluster must be at least 10, got {}",
            spec.n_per_cluster
        )));
    }
    if !(spec.noise_sd > 0.0 && spec.noise_sd.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise_sd must be positive, got {}",
            spec.noise_sd
        )));
    }
    if !(spec.separation > 0.0 && spec.separation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "separation must be positive, got {}",
            spec.separation
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let noise = Normal::new(0.0, spec.noise_sd).expect("positive sd");
    let n = 2 * spec.n_per_cluster;
    let mut values = Vec::with_capacity(n * DIMENSIONS);
    for _ in 0..spec.n_per_cluster {
        let (u, v): (f64, f64) = (unit.sample(&mut rng), unit.sample(&mut rng));
        values.extend([u, v, u * u - v * v, 0.1 * u * v]);
        values.extend((0..3).map(|_| noise.sample(&mut rng)));
    }
    for _ in 0..spec.n_per_cluster {
        let (a, b, c): (f64, f64, f64) = (
            unit.sample(&mut rng),
            unit.sample(&mut rng),
            unit.sample(&mut rng),
        );
        values.extend([a + spec.separation, b, c, 0.5 * (a * a + b * b + c * c)]);
        values.extend((0..3).map(|_| noise.sample(&mut rng)));
    }
    let mut labels = vec![0u8; spec.n_per_cluster];
    labels.resize(n, 1);
    let names = (1..=DIMENSIONS).map(|j| format!("x{j}")).collect();
    Ok((Dataset::new(values, n, names)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_labels() {
        let (d, labels) = gen_2nc7(&SyntheticSpec {
            n_per_cluster: 50,
            ..Default::default()
        })
        .unwrap();
        assert_eq!((d.n(), d.p()), (100, 7));
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 50);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 50);
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SyntheticSpec {
            n_per_cluster: 30,
            seed: 9,
            ..Default::default()
        };
        assert_eq!(gen_2nc7(&spec).unwrap(), gen_2nc7(&spec).unwrap());
        let other = SyntheticSpec { seed: 10, ..spec };
        assert_ne!(gen_2nc7(&spec).unwrap().0, gen_2nc7(&other).unwrap().0);
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = SyntheticSpec {
            n_per_cluster: 5,
            ..Default::default()
        };
        assert!(gen_2nc7(&bad).is_err());
        let bad = SyntheticSpec {
            noise_sd: 0.0,
            ..Default::default()
        };
        assert!(gen_2nc7(&bad).is_err());
    }
}
