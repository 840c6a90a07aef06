//! File emission helpers. Every writer is deterministic: stable field
//! order, sorted collections, and positional-decimal numbers.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::errors::AppError;

pub fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Data(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    fs::write(path, text)?;
    Ok(())
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
