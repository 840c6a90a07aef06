//! Exponent-free numeric JSON output.
//!
//! `serde_json` renders small floats like `1e-6` in scientific notation.
//! Emitted report files carry plain decimal throughout, so float fields in
//! output schemas go through [`Dec`], which writes the `Display` rendering
//! of the value as a raw JSON number token. `Display` for `f64` is always
//! positional, so the token never carries an exponent.

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};

/// An `f64` that serialises to JSON as a positional decimal number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dec(pub f64);

impl From<f64> for Dec {
    fn from(v: f64) -> Self {
        Dec(v)
    }
}

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("cannot serialize non-finite number"));
        }
        let raw = serde_json::value::RawValue::from_string(decimal_string(self.0))
            .map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Dec)
    }
}

/// Positional decimal rendering of a finite float, with a `.0` suffix on
/// integral values so the token stays a JSON float.
pub fn decimal_string(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}
