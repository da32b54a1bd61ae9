#![allow(dead_code)]

use hexlift::simdata::{gen_2nc7, SyntheticSpec};
use hexlift::{scale_layout, Dataset, RawLayout, ScaledLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(n: usize, p: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    Dataset::from_rows(&rows).unwrap()
}

pub fn random_layout(n: usize, seed: u64) -> ScaledLayout {
    let mut r = rng(seed);
    let pts = (0..n)
        .map(|_| [r.random_range(-3.0..5.0), r.random_range(0.0..2.0)])
        .collect();
    scale_layout(&RawLayout::new("random", pts).unwrap(), true).unwrap()
}

/// Synthetic two-cluster data and the layout given by its first two coordinates.
pub fn two_cluster(n_per_cluster: usize, seed: u64) -> (Dataset, ScaledLayout) {
    let (data, _) = gen_2nc7(&SyntheticSpec {
        n_per_cluster,
        seed,
        ..Default::default()
    })
    .unwrap();
    let pts = data.rows().map(|r| [r[0], r[1]]).collect();
    let layout = scale_layout(&RawLayout::new("true", pts).unwrap(), true).unwrap();
    (data, layout)
}

pub fn permuted_layout(layout: &ScaledLayout, seed: u64) -> ScaledLayout {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..layout.len()).collect();
    order.shuffle(&mut rng(seed));
    let mut out = layout.clone();
    out.layout_id = format!("permuted-{seed}");
    out.points = order.iter().map(|&i| layout.points[i]).collect();
    out
}

pub fn spearman_naive(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let less = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
