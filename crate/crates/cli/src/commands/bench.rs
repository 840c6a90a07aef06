//! `baire bench`: time the linear build against the quadratic reference.
//!
//! `bench.json` carries wall-clock numbers and is inherently run-dependent;
//! `bench_ops.json` holds only the machine-independent operation counts and
//! is byte-stable across reruns of the same configuration.

use serde_json::json;

use baire::bench::{run as run_bench, BenchConfig};
use baire::jsonfmt::Dec;

use crate::args::BenchArgs;
use crate::errors::AppError;
use crate::outputs::{ensure_dir, out_path, write_json};

pub fn run(args: BenchArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let params = args.encoding.params()?;
    let depth = args.depth.unwrap_or(params.precision());
    let config = BenchConfig {
        baire_sizes: args.sizes.clone(),
        ahc_sizes: args.ahc_sizes.clone(),
        reps: args.reps,
        seed: args.seed,
        params,
        max_depth: depth,
        noise: args.noise,
    };
    let result = run_bench(&config)?;

    let timing_rows = |points: &[baire::bench::BenchPoint]| -> Vec<serde_json::Value> {
        points
            .iter()
            .map(|p| {
                json!({
                    "n": p.n,
                    "median_secs": Dec(p.median_secs),
                    "runs_secs": p.runs_secs.iter().map(|&r| Dec(r)).collect::<Vec<_>>(),
                    "bucket_ops": p.bucket_ops,
                })
            })
            .collect()
    };
    let full = json!({
        "max_depth": result.max_depth,
        "reps": config.reps,
        "seed": config.seed,
        "baire": timing_rows(&result.baire),
        "ahc": timing_rows(&result.ahc),
        "baire_wall_slope": result.baire_slope.map(Dec),
        "ahc_wall_slope": result.ahc_slope.map(Dec),
    });
    write_json(&out_path(&args.out_dir, "bench.json"), &full)?;

    let ops_rows: Vec<_> = result
        .baire
        .iter()
        .map(|p| {
            let expected = (p.n as u64) * (result.max_depth as u64 + 1);
            json!({
                "n": p.n,
                "bucket_ops": p.bucket_ops,
                "expected_ops": expected,
                "exact": p.bucket_ops == Some(expected),
            })
        })
        .collect();
    let ops = json!({
        "max_depth": result.max_depth,
        "seed": config.seed,
        "baire": ops_rows,
        "ahc_sizes": config.ahc_sizes,
    });
    write_json(&out_path(&args.out_dir, "bench_ops.json"), &ops)?;

    println!(
        "baire wall slope {:?}, ahc wall slope {:?}; details in {}",
        result.baire_slope,
        result.ahc_slope,
        args.out_dir.display()
    );
    Ok(())
}
