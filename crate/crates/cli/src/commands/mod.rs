pub mod bench;
pub mod cluster;
pub mod regress;
pub mod stats;
pub mod synth;

use std::path::Path;

use baire::redshift::{Ingest, IngestOptions};

use crate::errors::AppError;
use crate::outputs::{out_path, write_json};

/// Ingest a catalog and drop the accounting report next to the other
/// outputs.
pub fn ingest_with_report(
    input: &Path,
    options: &IngestOptions,
    out_dir: &Path,
) -> Result<Ingest, AppError> {
    let ingest = baire::redshift::ingest(input, options)?;
    let report = serde_json::to_value(&ingest.report)
        .map_err(|e| AppError::Data(format!("serialization failed: {e}")))?;
    write_json(&out_path(out_dir, "ingest_report.json"), &report)?;
    Ok(ingest)
}
