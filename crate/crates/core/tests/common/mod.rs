//! Test-only generators and independent reference computations.
#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use logme_core::FeatureMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, h: usize) -> FeatureMatrix {
    FeatureMatrix::new(n, h, normals(rng, n * h)).unwrap()
}

/// `y = F w + noise_scale * ε` for standard-normal `w` and `ε`.
pub fn linear_target(rng: &mut ChaCha8Rng, f: &FeatureMatrix, noise_scale: f64) -> Vec<f64> {
    let w = normals(rng, f.n_cols());
    let eps = normals(rng, f.n_rows());
    f.rows()
        .zip(eps)
        .map(|(row, e)| row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + noise_scale * e)
        .collect()
}

/// Labels from `argmax(F W + noise)` with every class forced to occur.
pub fn argmax_labels(rng: &mut ChaCha8Rng, f: &FeatureMatrix, k: usize, noise: f64) -> Vec<u32> {
    let h = f.n_cols();
    let w = normals(rng, h * k);
    let mut labels: Vec<u32> = f
        .rows()
        .map(|row| {
            let scores: Vec<f64> = (0..k)
                .map(|c| {
                    (0..h).map(|j| row[j] * w[j * k + c]).sum::<f64>()
                        + noise * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            (0..k)
                .max_by(|&a, &b| scores[a].total_cmp(&scores[b]))
                .unwrap() as u32
        })
        .collect();
    for c in 0..k {
        if !labels.contains(&(c as u32)) {
            labels[c] = c as u32;
        }
    }
    labels
}
