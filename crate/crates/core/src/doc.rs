//! Shared plumbing for the versioned text documents every persisted artifact
//! uses (transition models, value/policy tables, Q tables, belief snapshots,
//! pitch configurations, transfer parameter packs).
//!
//! Documents are pretty-printed JSON objects carrying a `schema_version`.
//! Probabilities and values are written with exactly 12 decimal digits so
//! regenerated files are diff-stable.

use serde::de::DeserializeOwned;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Current schema version written into every document.
pub const SCHEMA_VERSION: u32 = 1;

/// Renders `x` with 12 decimal digits; negative zero is printed as zero.
pub fn format_fixed12(x: f64) -> String {
    format!("{:.12}", x + 0.0)
}

/// `serialize_with` helper emitting a JSON number with 12 decimal digits.
pub fn fixed12<S: Serializer>(x: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!("non-finite number {x}")));
    }
    let raw = RawValue::from_string(format_fixed12(*x)).map_err(S::Error::custom)?;
    raw.serialize(serializer)
}

pub fn to_document<T: Serialize>(doc: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}

pub fn from_document<T: DeserializeOwned>(text: &str) -> Result<T> {
    #[derive(serde::Deserialize)]
    struct Header {
        schema_version: u32,
    }
    let header: Header = serde_json::from_str(text)?;
    ensure_version(header.schema_version)?;
    Ok(serde_json::from_str(text)?)
}

pub fn ensure_version(found: u32) -> Result<()> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::SchemaVersion {
            found,
            expected: SCHEMA_VERSION,
        })
    }
}
