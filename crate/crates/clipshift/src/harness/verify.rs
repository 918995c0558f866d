//! Monte-Carlo checks of the clipping moment bounds and the prox properties.

use serde::Serialize;

use crate::error::Result;
use crate::noise::{derive_stream, NoiseSpec};
use crate::operators::{check_prox_properties, verify_clip_moment_bounds, BoundReport, PropertyCheck};

pub const VERIFY_DIM: usize = 2;
pub const LAMBDA_GRID: [f64; 3] = [1.0, 4.0, 16.0];

#[derive(Debug, Clone, Serialize)]
pub struct BoundCell {
    pub name: String,
    pub noise: NoiseSpec,
    pub report: BoundReport,
}

/// Moment orders 1.5 and 2 over [`LAMBDA_GRID`], plus a noiseless cell.
///
/// Order 2 uses Gaussian noise. Order 1.5 uses Lévy noise of index 1.8, whose
/// 1.5-th moment is finite; index-1.5 noise would make `σ` infinite.
pub fn moment_cells() -> Vec<(String, NoiseSpec, f64, f64)> {
    let mut cells = vec![("none".to_string(), NoiseSpec::none(), 2.0, 1.0)];
    for &lambda in &LAMBDA_GRID {
        cells.push((format!("gaussian alpha=2 lambda={lambda}"), NoiseSpec::gaussian(1.0), 2.0, lambda));
    }
    for &lambda in &LAMBDA_GRID {
        cells.push((format!("levy1.8 alpha=1.5 lambda={lambda}"), NoiseSpec::levy(1.8, 1.0), 1.5, lambda));
    }
    cells
}

/// Runs every cell of [`moment_cells`] with the mean `λ/4 · e₁`.
pub fn clip_bound_matrix(n_samples: usize, root_seed: u64) -> Result<Vec<BoundCell>> {
    moment_cells()
        .into_iter()
        .enumerate()
        .map(|(i, (name, noise, alpha, lambda))| {
            let mut mean = vec![0.0; VERIFY_DIM];
            mean[0] = lambda / 4.0;
            let stream = derive_stream(root_seed, i as u64, 0, 0, 0);
            let report = verify_clip_moment_bounds(&mean, &noise, lambda, None, alpha, n_samples, 1, &stream)?;
            Ok(BoundCell { name, noise, report })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRatio {
    pub n_workers: usize,
    pub single: f64,
    pub averaged: f64,
    pub ratio: f64,
}

/// Variance of the average of `n_workers` clipped samples relative to a
/// single clipped sample (Gaussian noise, λ = 4).
pub fn distributed_variance_ratio(n_samples: usize, n_workers: usize, root_seed: u64) -> Result<VarianceRatio> {
    let lambda = 4.0;
    let noise = NoiseSpec::gaussian(1.0);
    let mut mean = vec![0.0; VERIFY_DIM];
    mean[0] = 1.0;
    let run = |n: usize, trial: u64| -> Result<f64> {
        let r = verify_clip_moment_bounds(&mean, &noise, lambda, None, 2.0, n_samples, n, &derive_stream(root_seed, trial, 0, 0, 0))?;
        Ok(r.repetitions.iter().map(|x| x.variance).sum::<f64>() / r.repetitions.len() as f64)
    };
    let single = run(1, 1000)?;
    let averaged = run(n_workers, 1001)?;
    Ok(VarianceRatio { n_workers, single, averaged, ratio: averaged / single })
}

pub fn prox_checks(root_seed: u64) -> Vec<PropertyCheck> {
    check_prox_properties(5, 2000, &derive_stream(root_seed, 2000, 0, 0, 0))
}
