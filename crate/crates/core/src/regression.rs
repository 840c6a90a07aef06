//! Clusterwise nearest-neighbor regression.
//!
//! Training pairs are bucketed into a prefix tree on the predictor series.
//! A query descends its own digit path to the deepest node that still holds
//! `min_cluster_size` training pairs and averages the `k_neighbors` nearest
//! predictors inside that cluster; a query whose level-0 node is already
//! too small falls back to plain global k-NN and reports depth -1. Every
//! neighbor used at depth `k` therefore shares at least `k` fractional
//! prefix digits with the query.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::{encode, BaireParams};
use crate::jsonfmt::Dec;
use crate::redshift::RedshiftRecord;
use crate::tree::{BaireTree, MemberPolicy, NodePath, RootKey, TreeError};

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {need} training pairs, got {have}")]
    TooFewPairs { have: usize, need: usize },
    #[error("training pair {index} is not finite")]
    NonFinite { index: usize },
    #[error("query value is not finite: {0}")]
    NonFiniteQuery(f64),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("failed to read or write model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Malformed(String),
}

/// Which series predicts which. The tree is always built on the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Predict `z_spec` from `z_phot` (the calibration direction). Default.
    #[default]
    PhotToSpec,
    SpecToPhot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub k_neighbors: usize,
    pub min_cluster_size: usize,
    pub direction: Direction,
    pub params: BaireParams,
    pub max_depth: usize,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        let params = BaireParams::default();
        RegressionConfig {
            k_neighbors: 5,
            min_cluster_size: 10,
            direction: Direction::default(),
            params,
            max_depth: params.precision(),
        }
    }
}

impl RegressionConfig {
    /// Check the cross-field constraints; [`ClusterwiseModel::fit`] runs
    /// this too, but callers can reject bad configurations before doing
    /// any ingestion work.
    pub fn validate(&self) -> Result<(), RegressionError> {
        if self.k_neighbors == 0 {
            return Err(RegressionError::InvalidConfig(
                "k_neighbors must be at least 1".into(),
            ));
        }
        if self.min_cluster_size < self.k_neighbors {
            return Err(RegressionError::InvalidConfig(format!(
                "min_cluster_size {} must be at least k_neighbors {}",
                self.min_cluster_size, self.k_neighbors
            )));
        }
        if self.max_depth > self.params.precision() {
            return Err(RegressionError::InvalidConfig(format!(
                "max_depth {} exceeds encoding precision {}",
                self.max_depth,
                self.params.precision()
            )));
        }
        Ok(())
    }
}

/// Map catalog records to `(predictor, response)` pairs for a direction.
pub fn training_pairs(records: &[RedshiftRecord], direction: Direction) -> Vec<(f64, f64)> {
    records
        .iter()
        .map(|r| match direction {
            Direction::PhotToSpec => (r.z_phot, r.z_spec),
            Direction::SpecToPhot => (r.z_spec, r.z_phot),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct TrainPair {
    predictor: f64,
    response: f64,
}

/// A fitted clusterwise model: immutable, safe to share across threads.
#[derive(Debug, Clone)]
pub struct ClusterwiseModel {
    config: RegressionConfig,
    tree: BaireTree,
    pairs: Vec<TrainPair>,
    /// Per-node pair indices, sorted by `(predictor, index)`.
    node_index: HashMap<NodePath, Vec<u32>>,
    /// All pair indices, sorted by `(predictor, index)`.
    global_index: Vec<u32>,
}

/// One prediction: the response estimate and the tree depth that supplied
/// the neighbors (-1 for the global fallback).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub estimate: f64,
    pub resolved_depth: i32,
}

impl ClusterwiseModel {
    pub fn fit(pairs: &[(f64, f64)], config: RegressionConfig) -> Result<Self, RegressionError> {
        config.validate()?;
        if pairs.len() < config.k_neighbors {
            return Err(RegressionError::TooFewPairs {
                have: pairs.len(),
                need: config.k_neighbors,
            });
        }
        for (index, &(p, r)) in pairs.iter().enumerate() {
            if !p.is_finite() || !r.is_finite() {
                return Err(RegressionError::NonFinite { index });
            }
        }
        let pairs: Vec<TrainPair> = pairs
            .iter()
            .map(|&(predictor, response)| TrainPair {
                predictor,
                response,
            })
            .collect();
        let tree = BaireTree::build(
            pairs
                .iter()
                .enumerate()
                .map(|(i, p)| (i as u64, p.predictor)),
            config.params,
            config.max_depth,
            MemberPolicy::AllLevels,
        )?;

        let sort_key = |pairs: &[TrainPair], i: u32| (pairs[i as usize].predictor, i);
        let mut node_index: HashMap<NodePath, Vec<u32>> = HashMap::new();
        for (path, _, members) in tree.nodes() {
            let mut indices: Vec<u32> = members
                .expect("all levels materialized")
                .iter()
                .map(|&id| id as u32)
                .collect();
            indices.sort_by(|&a, &b| {
                sort_key(&pairs, a)
                    .partial_cmp(&sort_key(&pairs, b))
                    .unwrap()
            });
            node_index.insert(path.clone(), indices);
        }
        let mut global_index: Vec<u32> = (0..pairs.len() as u32).collect();
        global_index.sort_by(|&a, &b| {
            sort_key(&pairs, a)
                .partial_cmp(&sort_key(&pairs, b))
                .unwrap()
        });

        Ok(ClusterwiseModel {
            config,
            tree,
            pairs,
            node_index,
            global_index,
        })
    }

    /// Fit from catalog records in the configured direction.
    pub fn fit_records(
        records: &[RedshiftRecord],
        config: RegressionConfig,
    ) -> Result<Self, RegressionError> {
        Self::fit(&training_pairs(records, config.direction), config)
    }

    pub fn config(&self) -> &RegressionConfig {
        &self.config
    }

    pub fn tree(&self) -> &BaireTree {
        &self.tree
    }

    pub fn n_training(&self) -> usize {
        self.pairs.len()
    }

    pub fn predict(&self, query: f64) -> Result<Prediction, RegressionError> {
        let (prediction, _) = self.predict_detailed(query)?;
        Ok(prediction)
    }

    /// [`predict`](Self::predict) plus the training pairs that were
    /// averaged, as `(predictor, response)` in selection order.
    pub fn predict_detailed(
        &self,
        query: f64,
    ) -> Result<(Prediction, Vec<(f64, f64)>), RegressionError> {
        if !query.is_finite() {
            return Err(RegressionError::NonFiniteQuery(query));
        }
        let digits = encode(query, &self.config.params).map_err(TreeError::Codec)?;
        let mut path = NodePath {
            root: RootKey {
                sign: digits.sign(),
                int_digits: digits.int_digits().to_vec(),
            },
            frac: Vec::with_capacity(self.config.max_depth),
        };
        let mut resolved: Option<(i32, &[u32])> = None;
        for depth in 0..=self.config.max_depth {
            if depth > 0 {
                path.frac.push(digits.frac_digits()[depth - 1]);
            }
            match self.node_index.get(&path) {
                Some(indices) if indices.len() >= self.config.min_cluster_size => {
                    resolved = Some((depth as i32, indices));
                }
                // Counts only shrink with depth; stop at the first gap.
                _ => break,
            }
        }
        let (resolved_depth, indices) = resolved.unwrap_or((-1, &self.global_index));
        let neighbors = k_nearest(&self.pairs, indices, query, self.config.k_neighbors);
        let estimate = neighbors
            .iter()
            .map(|&i| self.pairs[i as usize].response)
            .sum::<f64>()
            / neighbors.len() as f64;
        let used = neighbors
            .iter()
            .map(|&i| {
                let p = self.pairs[i as usize];
                (p.predictor, p.response)
            })
            .collect();
        Ok((
            Prediction {
                estimate,
                resolved_depth,
            },
            used,
        ))
    }

    /// RMSE/MAE over held-out pairs, the per-depth resolution counts, and
    /// a global k-NN baseline with the same neighbor count.
    pub fn evaluate(&self, test: &[(f64, f64)]) -> Result<RegressionReport, RegressionError> {
        if test.is_empty() {
            return Err(RegressionError::EmptyTestSet);
        }
        let mut sq = 0.0;
        let mut abs = 0.0;
        let mut baseline_sq = 0.0;
        let mut per_depth: BTreeMap<i32, u64> = BTreeMap::new();
        for &(query, actual) in test {
            let prediction = self.predict(query)?;
            let err = prediction.estimate - actual;
            sq += err * err;
            abs += err.abs();
            *per_depth.entry(prediction.resolved_depth).or_insert(0) += 1;

            let neighbors = k_nearest(
                &self.pairs,
                &self.global_index,
                query,
                self.config.k_neighbors,
            );
            let baseline = neighbors
                .iter()
                .map(|&i| self.pairs[i as usize].response)
                .sum::<f64>()
                / neighbors.len() as f64;
            let base_err = baseline - actual;
            baseline_sq += base_err * base_err;
        }
        let n = test.len() as f64;
        Ok(RegressionReport {
            n_train: self.pairs.len() as u64,
            n_test: test.len() as u64,
            rmse: (sq / n).sqrt(),
            mae: abs / n,
            baseline_rmse: (baseline_sq / n).sqrt(),
            per_depth,
        })
    }

    /// Serialize as the tree JSON form extended with the training pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "tree": self.tree.to_json(),
            "pairs": self
                .pairs
                .iter()
                .map(|p| serde_json::json!({ "predictor": Dec(p.predictor), "response": Dec(p.response) }))
                .collect::<Vec<_>>(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), RegressionError> {
        let mut out = serde_json::to_string_pretty(&self.to_json())
            .map_err(|e| RegressionError::Malformed(e.to_string()))?;
        out.push('\n');
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Load a saved model by re-fitting its stored pairs; the embedded tree
    /// must agree on the number of observations.
    pub fn load(path: &Path) -> Result<Self, RegressionError> {
        #[derive(Deserialize)]
        struct PairRepr {
            predictor: Dec,
            response: Dec,
        }
        #[derive(Deserialize)]
        struct ModelFile {
            config: RegressionConfig,
            tree: serde_json::Value,
            pairs: Vec<PairRepr>,
        }
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| RegressionError::Malformed(e.to_string()))?;
        let pairs: Vec<(f64, f64)> = file
            .pairs
            .iter()
            .map(|p| (p.predictor.0, p.response.0))
            .collect();
        let model = Self::fit(&pairs, file.config)?;
        let stored_items = file.tree.get("n_items").and_then(|v| v.as_u64());
        if stored_items != Some(model.tree.n_items()) {
            return Err(RegressionError::Malformed(format!(
                "stored tree holds {stored_items:?} items, refit produced {}",
                model.tree.n_items()
            )));
        }
        Ok(model)
    }
}

/// Evaluation summary. `per_depth` counts how many queries resolved at each
/// tree depth, with -1 for the global fallback; counts sum to `n_test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub n_train: u64,
    pub n_test: u64,
    pub rmse: f64,
    pub mae: f64,
    pub baseline_rmse: f64,
    pub per_depth: BTreeMap<i32, u64>,
}

impl RegressionReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_train": self.n_train,
            "n_test": self.n_test,
            "rmse": Dec(self.rmse),
            "mae": Dec(self.mae),
            "baseline_rmse": Dec(self.baseline_rmse),
            "per_depth": self
                .per_depth
                .iter()
                .map(|(depth, count)| serde_json::json!({ "depth": depth, "count": count }))
                .collect::<Vec<_>>(),
        })
    }
}

/// The `k` candidates minimizing `(|predictor - query|, predictor, index)`
/// from an index slice sorted by `(predictor, index)`.
fn k_nearest(pairs: &[TrainPair], sorted: &[u32], query: f64, k: usize) -> Vec<u32> {
    let split = sorted.partition_point(|&i| pairs[i as usize].predictor < query);
    let lo = split.saturating_sub(k);
    let hi = (split + k).min(sorted.len());
    let mut window: Vec<u32> = sorted[lo..hi].to_vec();
    window.sort_by(|&a, &b| {
        let pa = pairs[a as usize].predictor;
        let pb = pairs[b as usize].predictor;
        ((pa - query).abs(), pa, a)
            .partial_cmp(&((pb - query).abs(), pb, b))
            .expect("finite predictors")
    });
    window.truncate(k.min(window.len()));
    window
}
