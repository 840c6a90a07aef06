//! Acceptance suite. One test per criterion; the harness prints one
//! pass/fail line for each. Run with
//! `cargo test -p baire-cli --test acceptance -- --nocapture` to also see
//! the per-criterion `[PASS]` summaries.
//!
//! Tests share a lock so the wall-clock criteria never compete with the
//! other criteria for cores.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use baire::ahc::{agglomerate, baire_matrix, Linkage};
use baire::bench::{run as run_bench, BenchConfig};
use baire::digits::{baire_distance, common_prefix, encode, BaireParams, CommonPrefix, Rounding};
use baire::redshift::{classify, CoincidenceClass, CoincidenceTable, RedshiftRecord};
use baire::regression::{training_pairs, ClusterwiseModel, Direction, RegressionConfig};
use baire::synth::{generate, SynthConfig};
use baire::tree::{BaireTree, MemberPolicy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Values with heavy prefix sharing: coarse grids at several scales plus
/// raw uniforms, occasionally negative or with a nonzero integer part.
fn random_value(rng: &mut ChaCha8Rng, base: u32) -> f64 {
    let m = f64::from(base);
    match rng.gen_range(0..6) {
        0 => rng.gen_range(0..(m.powi(3) as i64 * 2)) as f64 / m.powi(3),
        1 => rng.gen_range(0..(m.powi(2) as i64)) as f64 / m.powi(2),
        2 => rng.gen_range(0..2000) as f64 / 1000.0,
        3 => rng.gen::<f64>() * 1.5,
        4 => -(rng.gen_range(0..500) as f64) / 250.0,
        _ => rng.gen_range(0..20) as f64 / 10.0,
    }
}

#[test]
fn criterion_1_ultrametric_axioms() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let mut triples = 0u64;
    for (base, precision) in [(2u32, 3usize), (2, 6), (10, 3), (10, 6)] {
        let params = BaireParams::new(base, precision, Rounding::Truncate).unwrap();
        for _ in 0..100_000 {
            let x = encode(random_value(&mut rng, base), &params).unwrap();
            let y = encode(random_value(&mut rng, base), &params).unwrap();
            let z = encode(random_value(&mut rng, base), &params).unwrap();
            let dxy = baire_distance(&x, &y).unwrap();
            let dyx = baire_distance(&y, &x).unwrap();
            let dyz = baire_distance(&y, &z).unwrap();
            let dxz = baire_distance(&x, &z).unwrap();
            // A1: positive, bounded by 1 (exact powers of the base).
            assert!(dxy > 0.0 && dxy <= 1.0);
            // A3: symmetric, bitwise.
            assert!(dxy == dyx);
            // A5: ultrametric inequality, exact.
            assert!(
                dxz <= dxy.max(dyz),
                "A5 violated at base {base}, precision {precision}: {dxz} > max({dxy}, {dyz})"
            );
            triples += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(triples >= 400_000);
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "axiom suite took {elapsed:?}, budget is 10 s"
    );
    println!(
        "[PASS] criterion 1: A1/A3/A5 exact on {triples} random triples across 4 configurations in {:.2} s",
        elapsed.as_secs_f64()
    );
}

fn partition_sets(tree: &BaireTree, depth: usize) -> Vec<Vec<u64>> {
    let mut sets: Vec<Vec<u64>> = tree
        .level_partition(depth)
        .unwrap()
        .iter()
        .map(|(path, _)| tree.members_under(path).unwrap())
        .collect();
    sets.sort();
    sets
}

#[test]
fn criterion_2_tree_reproduces_single_linkage_cuts() {
    let _g = serial();
    let depth = 3;
    let params = BaireParams::new(10, depth, Rounding::Truncate).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let mut checked_partitions = 0u64;
    for case in 0..50 {
        let n = rng.gen_range(2..=200);
        let values: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0..1300) as f64 / 1000.0)
            .collect();
        let tree = BaireTree::build(
            values
                .iter()
                .copied()
                .enumerate()
                .map(|(i, v)| (i as u64, v)),
            params,
            depth,
            MemberPolicy::Leaves,
        )
        .unwrap();
        let matrix = baire_matrix(&values, &params).unwrap();
        let single = agglomerate(&matrix, Linkage::Single).unwrap();

        for k in 1..=depth {
            let mut cut: Vec<Vec<u64>> = single
                .cut(params.level_distance(k))
                .into_iter()
                .map(|cluster| cluster.into_iter().map(|i| i as u64).collect())
                .collect();
            cut.sort();
            assert_eq!(
                cut,
                partition_sets(&tree, k),
                "case {case}: dendrogram cut at 10^-{k} differs from tree depth-{k} partition"
            );
            checked_partitions += 1;
        }

        let complete = agglomerate(&matrix, Linkage::Complete).unwrap();
        let coph_single = single.cophenetic_matrix();
        let coph_complete = complete.cophenetic_matrix();
        for i in 0..n {
            for j in 0..n {
                assert!(
                    coph_single.get(i, j) == coph_complete.get(i, j),
                    "case {case}: linkages disagree at ({i}, {j})"
                );
            }
        }
    }
    println!(
        "[PASS] criterion 2: 50 instances, {checked_partitions} level cuts identical to tree partitions; single and complete cophenetics identical"
    );
}

#[test]
fn criterion_3_cophenetic_recovers_baire_matrix() {
    let _g = serial();
    let params = BaireParams::new(10, 3, Rounding::Truncate).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    for case in 0..20 {
        let n = rng.gen_range(2..=100);
        let values: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0..1100) as f64 / 1000.0)
            .collect();
        let matrix = baire_matrix(&values, &params).unwrap();
        for linkage in [Linkage::Single, Linkage::Complete] {
            let coph = agglomerate(&matrix, linkage).unwrap().cophenetic_matrix();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        assert!(
                            coph.get(i, j) == matrix.get(i, j),
                            "case {case} ({linkage:?}): cophenetic({i},{j}) = {} != {}",
                            coph.get(i, j),
                            matrix.get(i, j)
                        );
                    }
                }
            }
        }
    }
    println!("[PASS] criterion 3: cophenetic(agglomerate(D)) == D entrywise on 20 Baire matrices, both linkages");
}

/// Brute-force class oracle: a character scan over the positional decimal
/// renderings, fully independent of the digit codec.
fn oracle_class(record: &RedshiftRecord, precision: usize) -> CoincidenceClass {
    let render = |v: f64| -> (bool, String, Vec<char>) {
        let negative = format!("{v}").starts_with('-');
        let s = format!("{}", v.abs());
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i.to_string(), f.to_string()),
            None => (s, String::new()),
        };
        let mut frac: Vec<char> = frac_part.chars().take(precision).collect();
        while frac.len() < precision {
            frac.push('0');
        }
        (negative, int_part, frac)
    };
    let (neg_s, int_s, frac_s) = render(record.z_spec);
    let (neg_p, int_p, frac_p) = render(record.z_phot);
    if neg_s != neg_p || int_s != int_p {
        return CoincidenceClass::Excluded;
    }
    let shared = frac_s
        .iter()
        .zip(frac_p.iter())
        .take_while(|(a, b)| a == b)
        .count();
    if shared == 0 {
        CoincidenceClass::IntOnly
    } else {
        CoincidenceClass::Depth(shared)
    }
}

#[test]
fn criterion_4_table_matches_string_oracle_on_fixture() {
    let _g = serial();
    let params = BaireParams::default();
    let records = generate(&SynthConfig {
        n: 10_000,
        seed: 0xF1,
        ..Default::default()
    });
    assert_eq!(records.len(), 10_000);

    let table = CoincidenceTable::compute(&records, &params).unwrap();

    let mut expected_int_only = 0u64;
    let mut expected_excluded = 0u64;
    let mut expected_by_depth = vec![0u64; params.precision()];
    for record in &records {
        let expected = oracle_class(record, params.precision());
        match expected {
            CoincidenceClass::Excluded => expected_excluded += 1,
            CoincidenceClass::IntOnly => expected_int_only += 1,
            CoincidenceClass::Depth(k) => expected_by_depth[k - 1] += 1,
        }
        // Record-by-record agreement, not just totals.
        assert_eq!(
            classify(record, &params).unwrap(),
            expected,
            "record {}",
            record.id
        );
    }
    assert_eq!(table.count(CoincidenceClass::IntOnly), expected_int_only);
    assert_eq!(table.excluded(), expected_excluded);
    for k in 1..=params.precision() {
        assert_eq!(
            table.count(CoincidenceClass::Depth(k)),
            expected_by_depth[k - 1],
            "class {k}"
        );
    }
    assert_eq!(
        table.total(),
        expected_int_only + expected_by_depth.iter().sum::<u64>()
    );
    println!(
        "[PASS] criterion 4: coincidence table equals the string-prefix oracle class-by-class on the 10^4 fixture"
    );
}

#[test]
fn criterion_5_published_tally_arithmetic_and_stats_surface() {
    let _g = serial();
    // The published selection's per-class counts.
    let table = CoincidenceTable::from_counts(76_187, vec![270_920, 85_999, 8_982, 912, 90, 4]);
    assert_eq!(table.total(), 443_094);
    let confidence = table.confidence_at_least(2).unwrap();
    assert!(confidence == 366_907.0 / 443_094.0);
    assert!(
        (confidence - 0.8281).abs() <= 1e-4,
        "confidence_at_least(2) = {confidence}, expected 0.8281 +/- 0.0001"
    );

    // The stats subcommand must surface the int_only/1-6 classes and the
    // at-least-two-digit confidence on any real selection it is given.
    let dirs = TestDirs::new();
    let fixture = dirs.fixture(2000, 0xA5);
    let out_dir = dirs.s("stats");
    run_ok(&["stats", "--input", &fixture, "--out-dir", &out_dir]);
    let table_json = read_json(&dirs.path("stats/coincidence_table.json"));
    let labels: Vec<String> = table_json["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["class"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(labels, ["int_only", "1", "2", "3", "4", "5", "6"]);
    let curve = read_json(&dirs.path("stats/confidence.json"));
    let has_two = curve
        .as_array()
        .unwrap()
        .iter()
        .any(|entry| entry["prefix_digits"] == 2 && entry["at_least"].is_number());
    assert!(
        has_two,
        "confidence curve must include the at-least-2-digits level"
    );
    println!(
        "[PASS] criterion 5: published tally gives confidence_at_least(2) = {confidence:.4} (366907/443094); stats surface emits classes int_only/1-6"
    );
}

#[test]
fn criterion_6_linear_build_vs_quadratic_oracle() {
    let _g = serial();
    let start = Instant::now();
    let params = BaireParams::default();
    let depth = params.precision();
    let config = BenchConfig {
        baire_sizes: vec![10_000, 100_000, 1_000_000],
        ahc_sizes: vec![200, 500, 1000, 2000],
        reps: 3,
        seed: 0xA6,
        params,
        max_depth: depth,
        noise: 0.005,
    };
    let result = run_bench(&config).unwrap();

    for point in &result.baire {
        let expected = (point.n as u64) * (depth as u64 + 1);
        assert_eq!(
            point.bucket_ops,
            Some(expected),
            "bucketing operations must equal n * (depth + 1) at n = {}",
            point.n
        );
    }
    let baire_slope = result.baire_slope.expect("enough sizes for a fit");
    assert!(
        (0.8..=1.3).contains(&baire_slope),
        "tree build log-log slope {baire_slope} outside [0.8, 1.3]"
    );
    let ahc_slope = result.ahc_slope.expect("enough sizes for a fit");
    assert!(
        ahc_slope >= 1.7,
        "reference clusterer slope {ahc_slope} below 1.7"
    );

    // Doubling check: building 2n items takes at most 2.5x the time of n.
    // Interleave the two sizes so allocator state drifts hit both equally,
    // and take medians of 7.
    let build_values = |n: usize| -> Vec<f64> {
        generate(&SynthConfig {
            n,
            seed: 0xD0,
            ..Default::default()
        })
        .into_iter()
        .map(|r| r.z_spec)
        .collect()
    };
    let timed_build = |values: &[f64]| -> f64 {
        let t = Instant::now();
        let tree = BaireTree::build(
            values
                .iter()
                .copied()
                .enumerate()
                .map(|(i, v)| (i as u64, v)),
            params,
            depth,
            MemberPolicy::None,
        )
        .unwrap();
        let elapsed = t.elapsed().as_secs_f64();
        assert_eq!(tree.n_items(), values.len() as u64);
        elapsed
    };
    let small = build_values(100_000);
    let large = build_values(200_000);
    timed_build(&small); // warm-up, untimed
    timed_build(&large);
    let (mut runs_n, mut runs_2n) = (Vec::new(), Vec::new());
    for _ in 0..7 {
        runs_n.push(timed_build(&small));
        runs_2n.push(timed_build(&large));
    }
    runs_n.sort_by(f64::total_cmp);
    runs_2n.sort_by(f64::total_cmp);
    let t_n = runs_n[3];
    let t_2n = runs_2n[3];
    assert!(
        t_2n <= 2.5 * t_n,
        "doubling from 10^5 items scaled by {:.2}x, budget is 2.5x",
        t_2n / t_n
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "bench took {elapsed:?}, budget is 5 min"
    );
    println!(
        "[PASS] criterion 6: ops = n*(depth+1) exactly; tree slope {baire_slope:.3} in [0.8, 1.3]; reference slope {ahc_slope:.3} >= 1.7; 2x items -> {:.2}x time; total {:.1} s",
        t_2n / t_n,
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_7_clusterwise_regression_sanity() {
    let _g = serial();
    let records = generate(&SynthConfig {
        n: 20_000,
        seed: 0xA7,
        noise: 0.005,
        ..Default::default()
    });
    let config = RegressionConfig::default();
    let pairs = training_pairs(&records, Direction::PhotToSpec);

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5517));
    let n_train = (pairs.len() * 4) / 5;
    let train: Vec<(f64, f64)> = order[..n_train].iter().map(|&i| pairs[i]).collect();
    let test: Vec<(f64, f64)> = order[n_train..].iter().map(|&i| pairs[i]).collect();

    let model = ClusterwiseModel::fit(&train, config).unwrap();
    let report = model.evaluate(&test).unwrap();

    assert!(
        report.rmse <= 1.05 * report.baseline_rmse,
        "clusterwise rmse {} exceeds 1.05x baseline {}",
        report.rmse,
        report.baseline_rmse
    );
    assert!(
        report.rmse <= 0.01,
        "rmse {} above twice the noise scale",
        report.rmse
    );

    // Locality: every neighbor behind a depth-k prediction shares at least
    // k fractional prefix digits with the query.
    let mut checked = 0u64;
    for &(query, _) in &test {
        let (prediction, used) = model.predict_detailed(query).unwrap();
        if prediction.resolved_depth >= 0 {
            let q = encode(query, &config.params).unwrap();
            for (predictor, _) in used {
                let p = encode(predictor, &config.params).unwrap();
                let shared = match common_prefix(&q, &p).unwrap() {
                    CommonPrefix::IntMismatch => panic!("neighbor outside the level-0 cluster"),
                    CommonPrefix::Depth(k) => k,
                };
                assert!(
                    shared >= prediction.resolved_depth as usize,
                    "neighbor {predictor} shares {shared} digits with {query}, below depth {}",
                    prediction.resolved_depth
                );
                checked += 1;
            }
        }
    }
    assert_eq!(report.per_depth.values().sum::<u64>(), report.n_test);
    println!(
        "[PASS] criterion 7: rmse {:.5} <= 1.05 x baseline {:.5} and <= 0.01; locality held for {checked} neighbor uses",
        report.rmse, report.baseline_rmse
    );
}

#[test]
fn criterion_8_cli_determinism() {
    let _g = serial();
    let dirs = TestDirs::new();
    let fixture = dirs.fixture(400, 0xA8);

    // synth: the fixture itself, twice.
    let again = dirs.s("again.csv");
    run_ok(&[
        "synth",
        "--out",
        &again,
        "--n",
        "400",
        "--seed",
        &format!("{}", 0xA8),
    ]);
    assert_eq!(
        read(Path::new(&fixture)),
        read(Path::new(&again)),
        "synth outputs differ"
    );

    let compare = |cmd: &str, extra: &[&str], files: &[&str]| {
        let d1 = dirs.s(&format!("{cmd}_1"));
        let d2 = dirs.s(&format!("{cmd}_2"));
        for d in [&d1, &d2] {
            let mut args = vec![cmd, "--input", &fixture, "--out-dir", d];
            args.extend_from_slice(extra);
            run_ok(&args);
        }
        for file in files {
            assert_eq!(
                read(&Path::new(&d1).join(file)),
                read(&Path::new(&d2).join(file)),
                "{cmd}/{file} differs between identical runs"
            );
        }
    };
    compare(
        "cluster",
        &["--format", "both"],
        &[
            "ingest_report.json",
            "tree_summary.json",
            "partitions.json",
            "partitions.csv",
        ],
    );
    compare(
        "stats",
        &["--format", "both", "--scatter-class", "2"],
        &[
            "ingest_report.json",
            "coincidence_table.json",
            "coincidence_table.csv",
            "confidence.json",
            "confidence.csv",
            "digit_hist_z_spec.json",
            "digit_hist_z_phot.json",
            "pairs_class_2.csv",
        ],
    );
    compare("regress", &["--seed", "11"], &["regression_report.json"]);

    // bench: wall-clock numbers are inherently run-dependent; the
    // machine-independent operation-count artifact is the deterministic
    // surface.
    let b1 = dirs.s("bench_1");
    let b2 = dirs.s("bench_2");
    for d in [&b1, &b2] {
        run_ok(&[
            "bench",
            "--out-dir",
            d,
            "--sizes",
            "1000,2000",
            "--ahc-sizes",
            "50,100",
            "--reps",
            "2",
            "--seed",
            "3",
        ]);
    }
    assert_eq!(
        read(&Path::new(&b1).join("bench_ops.json")),
        read(&Path::new(&b2).join("bench_ops.json")),
        "bench_ops.json differs between identical runs"
    );

    println!("[PASS] criterion 8: identical inputs and seeds give byte-identical outputs for every subcommand");
}

// ---------------------------------------------------------------------
// helpers

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_baire")
}

fn run_ok(args: &[&str]) -> Output {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap_or_else(|e| panic!("parse {}: {e}", path.display()))
}

struct TestDirs {
    _root: tempfile::TempDir,
    base: PathBuf,
}

impl TestDirs {
    fn new() -> Self {
        let root = tempfile::tempdir().unwrap();
        let base = root.path().to_path_buf();
        TestDirs { _root: root, base }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.base.join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn fixture(&self, n: usize, seed: u64) -> String {
        let out = self.s("fixture.csv");
        run_ok(&[
            "synth",
            "--out",
            &out,
            "--n",
            &n.to_string(),
            "--seed",
            &seed.to_string(),
        ]);
        out
    }
}
