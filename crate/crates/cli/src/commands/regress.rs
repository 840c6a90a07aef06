//! `baire regress`: seeded split, clusterwise fit, evaluation report.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use baire::regression::{training_pairs, ClusterwiseModel, RegressionConfig};

use crate::args::RegressArgs;
use crate::errors::AppError;
use crate::outputs::{ensure_dir, out_path, write_json};

pub fn run(args: RegressArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    if !(args.train_frac > 0.0 && args.train_frac < 1.0) {
        return Err(AppError::validation(format!(
            "--train-frac must lie strictly between 0 and 1, got {}",
            args.train_frac
        )));
    }
    let params = args.encoding.params()?;
    let depth = args.depth.unwrap_or(params.precision());
    let config = RegressionConfig {
        k_neighbors: args.k_neighbors,
        min_cluster_size: args.min_cluster_size,
        direction: args.direction.into(),
        params,
        max_depth: depth,
    };
    config.validate()?;

    let ingest =
        super::ingest_with_report(&args.input, &args.filter.ingest_options()?, &args.out_dir)?;
    let pairs = training_pairs(&ingest.records, config.direction);
    if pairs.len() < 2 {
        return Err(AppError::Data(format!(
            "need at least 2 records after filtering to split, got {}",
            pairs.len()
        )));
    }

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(args.seed));
    let n_train =
        ((pairs.len() as f64 * args.train_frac).round() as usize).clamp(1, pairs.len() - 1);
    let train: Vec<(f64, f64)> = order[..n_train].iter().map(|&i| pairs[i]).collect();
    let test: Vec<(f64, f64)> = order[n_train..].iter().map(|&i| pairs[i]).collect();

    let model = ClusterwiseModel::fit(&train, config)?;
    let report = model.evaluate(&test)?;

    let out = json!({
        "config": config,
        "split": { "seed": args.seed, "train_frac": args.train_frac },
        "report": report.to_json(),
    });
    write_json(&out_path(&args.out_dir, "regression_report.json"), &out)?;

    if let Some(save) = &args.save_model {
        model.save(save)?;
    }

    println!(
        "clusterwise rmse {:.6} (baseline {:.6}) over {} test queries",
        report.rmse, report.baseline_rmse, report.n_test
    );
    Ok(())
}
