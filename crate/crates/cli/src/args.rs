//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use baire::digits::{BaireParams, Rounding};
use baire::redshift::{ColumnNames, IngestOptions, Series};
use baire::regression::Direction;

use crate::errors::AppError;

#[derive(Parser)]
#[command(
    name = "baire",
    version,
    about = "Longest-common-prefix (Baire) clustering, redshift coincidence statistics, \
             clusterwise regression, and a linear-vs-quadratic benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the prefix tree over one redshift series and export its level
    /// partitions.
    Cluster(ClusterArgs),
    /// Per-record z_spec/z_phot prefix-coincidence table, confidence
    /// levels, and digit histograms.
    Stats(StatsArgs),
    /// Clusterwise nearest-neighbor regression with a global k-NN baseline.
    Regress(RegressArgs),
    /// Time the linear tree build against the quadratic reference
    /// clusterer and fit growth exponents.
    Bench(BenchArgs),
    /// Generate a seeded synthetic catalog CSV.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RoundingArg {
    Truncate,
    HalfEven,
}

impl From<RoundingArg> for Rounding {
    fn from(value: RoundingArg) -> Rounding {
        match value {
            RoundingArg::Truncate => Rounding::Truncate,
            RoundingArg::HalfEven => Rounding::HalfEven,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SeriesArg {
    ZSpec,
    ZPhot,
}

impl From<SeriesArg> for Series {
    fn from(value: SeriesArg) -> Series {
        match value {
            SeriesArg::ZSpec => Series::ZSpec,
            SeriesArg::ZPhot => Series::ZPhot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    PhotToSpec,
    SpecToPhot,
}

impl From<DirectionArg> for Direction {
    fn from(value: DirectionArg) -> Direction {
        match value {
            DirectionArg::PhotToSpec => Direction::PhotToSpec,
            DirectionArg::SpecToPhot => Direction::SpecToPhot,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// Digit-encoding flags shared by the analysis subcommands.
#[derive(Args, Clone)]
pub struct EncodingOpts {
    /// Digit base of the encoding.
    #[arg(long, default_value_t = 10)]
    pub base: u32,
    /// Fractional digits kept per value.
    #[arg(long, default_value_t = 6)]
    pub precision: usize,
    /// Rounding applied beyond the kept precision.
    #[arg(long, value_enum, default_value = "truncate")]
    pub rounding: RoundingArg,
}

impl EncodingOpts {
    pub fn params(&self) -> Result<BaireParams, AppError> {
        Ok(BaireParams::new(
            self.base,
            self.precision,
            self.rounding.into(),
        )?)
    }
}

/// Catalog filtering flags shared by the ingesting subcommands.
#[derive(Args, Clone)]
pub struct FilterOpts {
    #[arg(long, default_value_t = 0.0)]
    pub z_min: f64,
    #[arg(long, default_value_t = 0.6)]
    pub z_max: f64,
    /// Abort when more than this fraction of rows fail to parse.
    #[arg(long, default_value_t = 0.01)]
    pub max_bad_rows: f64,
    /// Header name of the right-ascension column.
    #[arg(long, default_value = "ra")]
    pub col_ra: String,
    /// Header name of the declination column.
    #[arg(long, default_value = "dec")]
    pub col_dec: String,
    /// Header name of the spectrometric redshift column.
    #[arg(long, default_value = "z_spec")]
    pub col_z_spec: String,
    /// Header name of the photometric redshift column.
    #[arg(long, default_value = "z_phot")]
    pub col_z_phot: String,
}

impl FilterOpts {
    pub fn ingest_options(&self) -> Result<IngestOptions, AppError> {
        if !self.z_min.is_finite() || !self.z_max.is_finite() || self.z_min > self.z_max {
            return Err(AppError::validation(format!(
                "--z-min {} and --z-max {} must be finite with z-min <= z-max",
                self.z_min, self.z_max
            )));
        }
        if !(0.0..=1.0).contains(&self.max_bad_rows) {
            return Err(AppError::validation("--max-bad-rows must lie in [0, 1]"));
        }
        Ok(IngestOptions {
            z_min: self.z_min,
            z_max: self.z_max,
            max_malformed_fraction: self.max_bad_rows,
            columns: ColumnNames {
                ra: self.col_ra.clone(),
                dec: self.col_dec.clone(),
                z_spec: self.col_z_spec.clone(),
                z_phot: self.col_z_phot.clone(),
            },
        })
    }
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Catalog CSV. Required unless --load-tree is given.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Which series to cluster.
    #[arg(long, value_enum, default_value = "z-spec")]
    pub series: SeriesArg,
    /// Tree depth; defaults to the encoding precision.
    #[arg(long)]
    pub depth: Option<usize>,
    #[command(flatten)]
    pub encoding: EncodingOpts,
    #[command(flatten)]
    pub filter: FilterOpts,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Also write the full tree (documented JSON form) here.
    #[arg(long)]
    pub save_tree: Option<PathBuf>,
    /// Skip ingestion and report on a previously saved tree.
    #[arg(long, conflicts_with = "input")]
    pub load_tree: Option<PathBuf>,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub encoding: EncodingOpts,
    #[command(flatten)]
    pub filter: FilterOpts,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Export the (z_spec, z_phot) scatter of these exact classes:
    /// `int_only`, `excluded`, or a depth like `3`. Repeatable.
    #[arg(long = "scatter-class")]
    pub scatter_classes: Vec<String>,
    /// Also render the digit histograms as static SVG bar charts.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub encoding: EncodingOpts,
    #[command(flatten)]
    pub filter: FilterOpts,
    /// Neighbors averaged per prediction.
    #[arg(long, default_value_t = 5)]
    pub k_neighbors: usize,
    /// Smallest cluster a query may resolve into.
    #[arg(long, default_value_t = 10)]
    pub min_cluster_size: usize,
    /// Tree depth; defaults to the encoding precision.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, default_value = "phot-to-spec")]
    pub direction: DirectionArg,
    /// Fraction of records used for training; the rest evaluate.
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,
    /// Seed of the train/test shuffle.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also write the fitted model here.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Tree-build sizes, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000")]
    pub sizes: Vec<usize>,
    /// Reference-clusterer sizes, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "200,500,1000,2000")]
    pub ahc_sizes: Vec<usize>,
    /// Timed repetitions per size; medians are reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Synthetic z_phot noise half-width.
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    /// Tree depth; defaults to the encoding precision.
    #[arg(long)]
    pub depth: Option<usize>,
    #[command(flatten)]
    pub encoding: EncodingOpts,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Uniform z_phot perturbation half-width.
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.6)]
    pub z_max: f64,
    /// Exponential concentration of z_spec toward zero.
    #[arg(long, default_value_t = 10.0)]
    pub rate: f64,
}
