//! `baire stats`: coincidence table, confidence levels, digit histograms,
//! and optional per-class scatter exports.

use serde_json::json;

use baire::jsonfmt::Dec;
use baire::redshift::{
    digit_distribution, pairwise_match_export, CoincidenceClass, CoincidenceTable, Series,
};

use crate::args::StatsArgs;
use crate::errors::AppError;
use crate::outputs::{ensure_dir, out_path, write_json, write_text};

pub fn run(args: StatsArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let params = args.encoding.params()?;
    let ingest =
        super::ingest_with_report(&args.input, &args.filter.ingest_options()?, &args.out_dir)?;
    let records = &ingest.records;

    let table = CoincidenceTable::compute(records, &params)?;
    let confidence = table.confidence_curve();
    let hist_spec = digit_distribution(records, Series::ZSpec, &params)?;
    let hist_phot = digit_distribution(records, Series::ZPhot, &params)?;

    if args.format.json() {
        write_json(
            &out_path(&args.out_dir, "coincidence_table.json"),
            &table.to_json(),
        )?;
        let curve: Vec<_> = confidence
            .iter()
            .map(|&(k, fraction)| json!({ "prefix_digits": k, "at_least": Dec(fraction) }))
            .collect();
        write_json(&out_path(&args.out_dir, "confidence.json"), &json!(curve))?;
        for (hist, name) in [
            (&hist_spec, "digit_hist_z_spec.json"),
            (&hist_phot, "digit_hist_z_phot.json"),
        ] {
            let value = serde_json::to_value(hist)
                .map_err(|e| AppError::Data(format!("serialization failed: {e}")))?;
            write_json(&out_path(&args.out_dir, name), &value)?;
        }
    }
    if args.format.csv() {
        write_text(
            &out_path(&args.out_dir, "coincidence_table.csv"),
            &table.to_csv(),
        )?;
        let mut curve = String::from("prefix_digits,at_least\n");
        for &(k, fraction) in &confidence {
            curve.push_str(&format!("{k},{fraction}\n"));
        }
        write_text(&out_path(&args.out_dir, "confidence.csv"), &curve)?;
        write_text(
            &out_path(&args.out_dir, "digit_hist_z_spec.csv"),
            &hist_spec.to_csv(),
        )?;
        write_text(
            &out_path(&args.out_dir, "digit_hist_z_phot.csv"),
            &hist_phot.to_csv(),
        )?;
    }

    if args.svg {
        for (hist, name) in [
            (&hist_spec, "digit_hist_z_spec.svg"),
            (&hist_phot, "digit_hist_z_phot.svg"),
        ] {
            write_text(
                &out_path(&args.out_dir, name),
                &crate::svg::digit_histogram_svg(hist),
            )?;
        }
    }

    for label in &args.scatter_classes {
        let class = parse_class(label, params.precision())?;
        let pairs = pairwise_match_export(records, class, &params)?;
        let mut csv = String::from("z_spec,z_phot\n");
        for (z_spec, z_phot) in pairs {
            csv.push_str(&format!("{z_spec},{z_phot}\n"));
        }
        write_text(
            &out_path(&args.out_dir, &format!("pairs_class_{label}.csv")),
            &csv,
        )?;
    }

    if table.total() == 0 {
        println!("no records after filtering; wrote an explicit empty table");
    } else {
        let deep = table.confidence_at_least(2.min(params.precision()))?;
        println!(
            "classified {} records ({} excluded); {:.1}% share at least one fractional digit",
            table.total(),
            table.excluded(),
            100.0 * deep
        );
    }
    Ok(())
}

fn parse_class(label: &str, precision: usize) -> Result<CoincidenceClass, AppError> {
    match label {
        "int_only" => Ok(CoincidenceClass::IntOnly),
        "excluded" => Ok(CoincidenceClass::Excluded),
        _ => match label.parse::<usize>() {
            Ok(k) if (1..=precision).contains(&k) => Ok(CoincidenceClass::Depth(k)),
            _ => Err(AppError::validation(format!(
                "--scatter-class must be 'int_only', 'excluded', or a depth in 1..={precision}, got '{label}'"
            ))),
        },
    }
}
