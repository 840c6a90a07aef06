//! Catalog ingestion and prefix-coincidence analytics for paired
//! spectrometric/photometric redshifts.
//!
//! Each catalog row carries one object's `z_spec` and `z_phot`. The
//! pipeline classifies every record by the exact number of leading
//! fractional digits the two measurements share, aggregates the classes
//! into a coincidence table with cumulative confidence levels, and tallies
//! per-position digit distributions for either series.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::{common_prefix, encode, BaireParams, CodecError, CommonPrefix};
use crate::jsonfmt::Dec;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("failed to open catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse catalog: {0}")]
    Csv(#[from] csv::Error),
    #[error("catalog is missing required column '{0}'")]
    MissingColumn(String),
    #[error("{malformed} of {rows} rows are malformed, above the error budget of {budget}")]
    MalformedBudgetExceeded {
        malformed: u64,
        rows: u64,
        budget: f64,
    },
    #[error("coincidence table is empty")]
    EmptyTable,
    #[error("depth {depth} is out of range 1..={precision}")]
    DepthOutOfRange { depth: usize, precision: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// One catalog row. `ra` and `dec` are pass-through metadata; `id` is the
/// 0-based ordinal of the row in its source file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedshiftRecord {
    pub id: u64,
    pub ra: f64,
    pub dec: f64,
    pub z_spec: f64,
    pub z_phot: f64,
}

/// Header names for the four required columns, matched case-insensitively.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnNames {
    pub ra: String,
    pub dec: String,
    pub z_spec: String,
    pub z_phot: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        ColumnNames {
            ra: "ra".into(),
            dec: "dec".into(),
            z_spec: "z_spec".into(),
            z_phot: "z_phot".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Records with either redshift outside `[z_min, z_max]` are filtered
    /// out and counted, never silently dropped.
    pub z_min: f64,
    pub z_max: f64,
    /// Hard error when more than this fraction of data rows fail to parse.
    pub max_malformed_fraction: f64,
    pub columns: ColumnNames,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            z_min: 0.0,
            z_max: 0.6,
            max_malformed_fraction: 0.01,
            columns: ColumnNames::default(),
        }
    }
}

/// How many first malformed line numbers to keep in the report.
const MALFORMED_SAMPLE: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub accepted: u64,
    pub malformed: u64,
    /// 1-based data-row numbers of the first few malformed rows.
    pub malformed_rows: Vec<u64>,
    /// Rows whose redshifts parse but fall outside `[z_min, z_max]`.
    pub out_of_range: u64,
    /// Rows whose redshifts parse to NaN or infinity.
    pub non_finite: u64,
}

#[derive(Debug)]
pub struct Ingest {
    pub records: Vec<RedshiftRecord>,
    pub report: IngestReport,
}

/// Stream a catalog CSV into filtered records plus a full accounting of
/// everything that was not accepted.
pub fn ingest(path: &Path, options: &IngestOptions) -> Result<Ingest, PipelineError> {
    let file = std::fs::File::open(path)?;
    ingest_reader(file, options)
}

pub fn ingest_reader<R: Read>(reader: R, options: &IngestOptions) -> Result<Ingest, PipelineError> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, PipelineError> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| PipelineError::MissingColumn(name.to_string()))
    };
    let col_ra = find(&options.columns.ra)?;
    let col_dec = find(&options.columns.dec)?;
    let col_spec = find(&options.columns.z_spec)?;
    let col_phot = find(&options.columns.z_phot)?;

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let in_range = |z: f64| z >= options.z_min && z <= options.z_max;

    for row in csv_reader.records() {
        let row = row?;
        report.rows_read += 1;
        let id = report.rows_read - 1;
        let field = |idx: usize| row.get(idx).and_then(|f| f.trim().parse::<f64>().ok());
        let parsed = (
            field(col_ra),
            field(col_dec),
            field(col_spec),
            field(col_phot),
        );
        let (Some(ra), Some(dec), Some(z_spec), Some(z_phot)) = parsed else {
            report.malformed += 1;
            if report.malformed_rows.len() < MALFORMED_SAMPLE {
                report.malformed_rows.push(report.rows_read);
            }
            continue;
        };
        if !z_spec.is_finite() || !z_phot.is_finite() {
            report.non_finite += 1;
            continue;
        }
        // A literal "-0" field would otherwise sit in the negative sign
        // class; adding positive zero normalizes it away.
        let (z_spec, z_phot) = (z_spec + 0.0, z_phot + 0.0);
        if !in_range(z_spec) || !in_range(z_phot) {
            report.out_of_range += 1;
            continue;
        }
        records.push(RedshiftRecord {
            id,
            ra,
            dec,
            z_spec,
            z_phot,
        });
        report.accepted += 1;
    }

    if report.rows_read > 0 {
        let fraction = report.malformed as f64 / report.rows_read as f64;
        if fraction > options.max_malformed_fraction {
            return Err(PipelineError::MalformedBudgetExceeded {
                malformed: report.malformed,
                rows: report.rows_read,
                budget: options.max_malformed_fraction,
            });
        }
    }
    Ok(Ingest { records, report })
}

/// Write records in the catalog CSV dialect. Values render in positional
/// decimal, never exponent notation.
pub fn write_records<W: Write>(mut writer: W, records: &[RedshiftRecord]) -> std::io::Result<()> {
    writeln!(writer, "ra,dec,z_spec,z_phot")?;
    for r in records {
        writeln!(writer, "{},{},{},{}", r.ra, r.dec, r.z_spec, r.z_phot)?;
    }
    Ok(())
}

pub fn write_records_csv(path: &Path, records: &[RedshiftRecord]) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_records(&mut file, records)?;
    file.flush()
}

/// Exact prefix-coincidence class of one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoincidenceClass {
    /// Sign or integer parts differ; excluded from the table total.
    Excluded,
    /// Integer part shared, no fractional coincidence.
    IntOnly,
    /// Exactly `k` leading fractional digits shared, `k >= 1`.
    Depth(usize),
}

/// Classify one record by the longest common prefix of its two redshifts.
pub fn classify(
    record: &RedshiftRecord,
    params: &BaireParams,
) -> Result<CoincidenceClass, PipelineError> {
    let spec = encode(record.z_spec, params)?;
    let phot = encode(record.z_phot, params)?;
    Ok(match common_prefix(&spec, &phot)? {
        CommonPrefix::IntMismatch => CoincidenceClass::Excluded,
        CommonPrefix::Depth(0) => CoincidenceClass::IntOnly,
        CommonPrefix::Depth(k) => CoincidenceClass::Depth(k),
    })
}

/// Per-class record counts. Classes are mutually exclusive: a record is
/// counted only at its exact coincidence depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceTable {
    precision: usize,
    int_mismatch: u64,
    int_only: u64,
    by_depth: Vec<u64>,
    total: u64,
}

impl CoincidenceTable {
    pub fn compute(
        records: &[RedshiftRecord],
        params: &BaireParams,
    ) -> Result<Self, PipelineError> {
        let mut table = CoincidenceTable {
            precision: params.precision(),
            int_mismatch: 0,
            int_only: 0,
            by_depth: vec![0; params.precision()],
            total: 0,
        };
        for record in records {
            match classify(record, params)? {
                CoincidenceClass::Excluded => {
                    table.int_mismatch += 1;
                    continue;
                }
                CoincidenceClass::IntOnly => table.int_only += 1,
                CoincidenceClass::Depth(k) => table.by_depth[k - 1] += 1,
            }
            table.total += 1;
        }
        Ok(table)
    }

    /// Assemble a table from externally known counts, e.g. a published
    /// tally. `by_depth[k-1]` is the exact class-`k` count.
    pub fn from_counts(int_only: u64, by_depth: Vec<u64>) -> Self {
        let total = int_only + by_depth.iter().sum::<u64>();
        CoincidenceTable {
            precision: by_depth.len(),
            int_mismatch: 0,
            int_only,
            by_depth,
            total,
        }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Records classified into the table (excluded records not included).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Records excluded for an integer-part mismatch, reported separately.
    pub fn excluded(&self) -> u64 {
        self.int_mismatch
    }

    pub fn count(&self, class: CoincidenceClass) -> u64 {
        match class {
            CoincidenceClass::Excluded => self.int_mismatch,
            CoincidenceClass::IntOnly => self.int_only,
            CoincidenceClass::Depth(k) => self.by_depth.get(k - 1).copied().unwrap_or(0),
        }
    }

    /// Fraction of classified records sharing at least `k` prefix digits,
    /// where the shared integer part counts as position 1. So
    /// `confidence_at_least(2)` is the fraction sharing at least one
    /// fractional digit, and `confidence_at_least(1)` is 1 by construction
    /// (every classified record shares its integer part).
    pub fn confidence_at_least(&self, k: usize) -> Result<f64, PipelineError> {
        if k == 0 || k > self.precision {
            return Err(PipelineError::DepthOutOfRange {
                depth: k,
                precision: self.precision,
            });
        }
        if self.total == 0 {
            return Err(PipelineError::EmptyTable);
        }
        let at_least: u64 = if k == 1 {
            self.total
        } else {
            self.by_depth[k - 2..].iter().sum()
        };
        Ok(at_least as f64 / self.total as f64)
    }

    /// `(k, confidence_at_least(k))` for every depth; empty when the table
    /// holds no records.
    pub fn confidence_curve(&self) -> Vec<(usize, f64)> {
        if self.total == 0 {
            return Vec::new();
        }
        (1..=self.precision)
            .map(|k| (k, self.confidence_at_least(k).expect("depth in range")))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let share = |count: u64| -> Dec {
            if self.total == 0 {
                Dec(0.0)
            } else {
                Dec(count as f64 / self.total as f64)
            }
        };
        let mut classes = vec![ClassRow {
            class: "int_only".into(),
            count: self.int_only,
            share: share(self.int_only),
        }];
        for (i, &count) in self.by_depth.iter().enumerate() {
            classes.push(ClassRow {
                class: (i + 1).to_string(),
                count,
                share: share(count),
            });
        }
        serde_json::to_value(TableJson {
            precision: self.precision,
            total: self.total,
            int_mismatch_excluded: self.int_mismatch,
            classes,
        })
        .expect("table serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,count,share\n");
        let share = |count: u64| -> f64 {
            if self.total == 0 {
                0.0
            } else {
                count as f64 / self.total as f64
            }
        };
        out.push_str(&format!(
            "int_only,{},{}\n",
            self.int_only,
            share(self.int_only)
        ));
        for (i, &count) in self.by_depth.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, count, share(count)));
        }
        out.push_str(&format!("total,{},1\n", self.total));
        out.push_str(&format!("int_mismatch_excluded,{},\n", self.int_mismatch));
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    precision: usize,
    total: u64,
    int_mismatch_excluded: u64,
    classes: Vec<ClassRow>,
}

#[derive(Serialize, Deserialize)]
struct ClassRow {
    class: String,
    count: u64,
    share: Dec,
}

/// Which redshift series an operation reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    ZSpec,
    ZPhot,
}

impl Series {
    pub fn value(self, record: &RedshiftRecord) -> f64 {
        match self {
            Series::ZSpec => record.z_spec,
            Series::ZPhot => record.z_phot,
        }
    }
}

/// `counts[k-1][d]`: records whose k-th fractional digit is `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitHistogram {
    pub series: Series,
    pub base: u32,
    pub precision: usize,
    pub n: u64,
    counts: Vec<Vec<u64>>,
}

impl DigitHistogram {
    pub fn count(&self, position: usize, digit: u8) -> u64 {
        self.counts[position - 1][usize::from(digit)]
    }

    pub fn position_counts(&self, position: usize) -> &[u64] {
        &self.counts[position - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("position");
        for d in 0..self.base {
            out.push_str(&format!(",d{d}"));
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&(i + 1).to_string());
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Tally the fractional digits of one series position by position.
pub fn digit_distribution(
    records: &[RedshiftRecord],
    series: Series,
    params: &BaireParams,
) -> Result<DigitHistogram, PipelineError> {
    let mut counts = vec![vec![0u64; params.base() as usize]; params.precision()];
    for record in records {
        let digits = encode(series.value(record), params)?;
        for (position, &d) in digits.frac_digits().iter().enumerate() {
            counts[position][usize::from(d)] += 1;
        }
    }
    Ok(DigitHistogram {
        series,
        base: params.base(),
        precision: params.precision(),
        n: records.len() as u64,
        counts,
    })
}

/// The `(z_spec, z_phot)` pairs in one exact coincidence class, in record
/// order — the scatter data behind per-depth correspondence plots.
pub fn pairwise_match_export(
    records: &[RedshiftRecord],
    class: CoincidenceClass,
    params: &BaireParams,
) -> Result<Vec<(f64, f64)>, PipelineError> {
    let mut out = Vec::new();
    for record in records {
        if classify(record, params)? == class {
            out.push((record.z_spec, record.z_phot));
        }
    }
    Ok(out)
}

/// Per-class record counts keyed by class, mostly for reporting.
pub fn class_breakdown(
    records: &[RedshiftRecord],
    params: &BaireParams,
) -> Result<BTreeMap<String, u64>, PipelineError> {
    let mut out = BTreeMap::new();
    for record in records {
        let key = match classify(record, params)? {
            CoincidenceClass::Excluded => "excluded".to_string(),
            CoincidenceClass::IntOnly => "int_only".to_string(),
            CoincidenceClass::Depth(k) => k.to_string(),
        };
        *out.entry(key).or_insert(0) += 1;
    }
    Ok(out)
}
