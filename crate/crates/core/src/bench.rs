//! Wall-clock and operation-count measurement of the linear-vs-quadratic
//! contrast.
//!
//! The tree build is timed across sizes and its bucketing-operation counter
//! recorded (`n * (depth + 1)` exactly); the agglomerative reference is
//! timed on much smaller sizes, with matrix construction kept outside the
//! timer. Growth exponents come from a least-squares fit of log time
//! against log size, on median-of-reps timings from a monotonic clock.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ahc::{agglomerate_with, baire_matrix, AhcError, Linkage};
use crate::digits::{BaireParams, CodecError};
use crate::synth::{generate, SynthConfig};
use crate::tree::{BaireTree, MemberPolicy, TreeError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Ahc(#[from] AhcError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Tree-build sizes; strictly increasing.
    pub baire_sizes: Vec<usize>,
    /// Agglomeration sizes; strictly increasing.
    pub ahc_sizes: Vec<usize>,
    /// Timed repetitions per size; the median is reported.
    pub reps: usize,
    pub seed: u64,
    pub params: BaireParams,
    pub max_depth: usize,
    pub noise: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let params = BaireParams::default();
        BenchConfig {
            baire_sizes: vec![10_000, 100_000, 1_000_000],
            ahc_sizes: vec![200, 500, 1000, 2000],
            reps: 5,
            seed: 42,
            params,
            max_depth: params.precision(),
            noise: 0.005,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        for sizes in [&self.baire_sizes, &self.ahc_sizes] {
            if !sizes.windows(2).all(|w| w[0] < w[1]) {
                return Err(BenchError::InvalidConfig(
                    "sizes must be strictly increasing".into(),
                ));
            }
        }
        if self.reps == 0 {
            return Err(BenchError::InvalidConfig("reps must be at least 1".into()));
        }
        if self.max_depth > self.params.precision() {
            return Err(BenchError::InvalidConfig(format!(
                "max_depth {} exceeds precision {}",
                self.max_depth,
                self.params.precision()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchPoint {
    pub n: usize,
    pub runs_secs: Vec<f64>,
    pub median_secs: f64,
    /// Bucketing operations, for the tree side only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_ops: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchResult {
    pub max_depth: usize,
    pub baire: Vec<BenchPoint>,
    pub ahc: Vec<BenchPoint>,
    pub baire_slope: Option<f64>,
    pub ahc_slope: Option<f64>,
}

/// Run the full harness. Time measurements are non-deterministic; sizes,
/// per-size data, and bucketing operation counts depend only on the seed.
pub fn run(config: &BenchConfig) -> Result<BenchResult, BenchError> {
    config.validate()?;
    let mut baire = Vec::with_capacity(config.baire_sizes.len());
    for &n in &config.baire_sizes {
        let values = sized_values(config, n);
        let mut runs = Vec::with_capacity(config.reps);
        let mut ops = 0;
        for _ in 0..config.reps {
            let start = Instant::now();
            let tree = BaireTree::build(
                values
                    .iter()
                    .copied()
                    .enumerate()
                    .map(|(i, v)| (i as u64, v)),
                config.params,
                config.max_depth,
                MemberPolicy::None,
            )?;
            runs.push(start.elapsed().as_secs_f64());
            ops = tree.bucket_ops();
        }
        baire.push(BenchPoint {
            n,
            median_secs: median(&runs),
            runs_secs: runs,
            bucket_ops: Some(ops),
        });
    }

    let ahc_cap = config.ahc_sizes.last().copied().unwrap_or(0);
    let mut ahc = Vec::with_capacity(config.ahc_sizes.len());
    for &n in &config.ahc_sizes {
        let values = sized_values(config, n);
        let matrix = baire_matrix(&values, &config.params)?;
        let mut runs = Vec::with_capacity(config.reps);
        for _ in 0..config.reps {
            let start = Instant::now();
            let dendrogram = agglomerate_with(&matrix, Linkage::Single, ahc_cap)?;
            runs.push(start.elapsed().as_secs_f64());
            assert_eq!(dendrogram.merges().len(), n.saturating_sub(1));
        }
        ahc.push(BenchPoint {
            n,
            median_secs: median(&runs),
            runs_secs: runs,
            bucket_ops: None,
        });
    }

    let slope = |points: &[BenchPoint]| {
        log_log_slope(
            &points
                .iter()
                .map(|p| (p.n as f64, p.median_secs))
                .collect::<Vec<_>>(),
        )
    };
    Ok(BenchResult {
        max_depth: config.max_depth,
        baire_slope: slope(&baire),
        ahc_slope: slope(&ahc),
        baire,
        ahc,
    })
}

fn sized_values(config: &BenchConfig, n: usize) -> Vec<f64> {
    let synth = SynthConfig {
        n,
        // Salt the seed per size so sizes do not share prefixes of one
        // stream, while staying deterministic.
        seed: config.seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        noise: config.noise,
        ..Default::default()
    };
    generate(&synth).into_iter().map(|r| r.z_spec).collect()
}

fn median(runs: &[f64]) -> f64 {
    let mut sorted = runs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// points or any non-positive coordinate.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>();
    let var = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    (var > 0.0).then(|| cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_recovers_exact_power_laws() {
        let linear: Vec<(f64, f64)> = (1..6).map(|i| (i as f64 * 1e4, i as f64 * 2e-3)).collect();
        assert!((log_log_slope(&linear).unwrap() - 1.0).abs() < 1e-9);
        let quadratic: Vec<(f64, f64)> = (1..6)
            .map(|i| ((i * i) as f64, (i * i * i * i) as f64 * 0.5))
            .collect();
        assert!((log_log_slope(&quadratic).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(log_log_slope(&[(1.0, 1.0)]), None);
        assert_eq!(log_log_slope(&[(1.0, 0.0), (2.0, 1.0)]), None);
    }

    #[test]
    fn median_of_runs() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[5.0]), 5.0);
    }

    #[test]
    fn tiny_run_counts_ops_exactly() {
        let config = BenchConfig {
            baire_sizes: vec![100, 200],
            ahc_sizes: vec![10, 20],
            reps: 1,
            ..Default::default()
        };
        let result = run(&config).unwrap();
        for point in &result.baire {
            assert_eq!(
                point.bucket_ops,
                Some((point.n * (config.max_depth + 1)) as u64)
            );
        }
        assert_eq!(result.ahc.len(), 2);
    }

    #[test]
    fn sizes_must_increase() {
        let config = BenchConfig {
            baire_sizes: vec![100, 100],
            ..Default::default()
        };
        assert!(matches!(run(&config), Err(BenchError::InvalidConfig(_))));
    }
}
