//! Canonical, deterministic XML and JSON forms of an [`EngMetaDataset`].
//!
//! Both forms list fields in declaration order, omit absent fields and
//! render decimals without exponent or trailing zeros, so equal datasets
//! always serialize to equal bytes.
//!
//! ```
//! use engmeta::{canon, EngMetaDataset, Title};
//!
//! let mut d = EngMetaDataset::default();
//! d.titles.push(Title::new("Binding energies"));
//! let xml = canon::to_xml(&d).unwrap();
//! assert!(xml.contains("<title>Binding energies</title>"));
//! assert_eq!(canon::from_xml(&xml).unwrap().dataset, d);
//! ```

mod json;
mod xml;

use thiserror::Error;

use crate::model::node::{DecodeCx, DecodeError, RawNode, Value};
use crate::model::{validate, Diagnostic, EngMetaDataset, MetadataPath, Profile, ValidationReport};

pub(crate) use json::tree_json_compact;
pub use json::{from_json, to_json, to_json_unchecked};
pub use xml::{from_xml, to_xml, to_xml_unchecked};

/// Default namespace of the XML form.
pub const NAMESPACE: &str = "urn:x-engmeta:1.0";

/// Name of the XML root element.
pub const ROOT: &str = "engMeta";

/// A decoded document and the non-fatal observations made while reading it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub dataset: EngMetaDataset,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("{line}:{column}: malformed document: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("root element is `{found}`, expected `{ROOT}`")]
    Root { found: String },
    #[error("{0}")]
    Field(Diagnostic),
    #[error("dataset fails structural validation:\n{0}")]
    Invalid(ValidationReport),
}

impl From<DecodeError> for CanonError {
    fn from(e: DecodeError) -> Self {
        CanonError::Field(e.0)
    }
}

fn check(dataset: &EngMetaDataset) -> Result<(), CanonError> {
    let report = validate(dataset, Profile::Structural);
    if report.is_valid() {
        Ok(())
    } else {
        Err(CanonError::Invalid(report))
    }
}

fn decode(root: &RawNode) -> Result<Parsed, CanonError> {
    let mut cx = DecodeCx::default();
    let dataset = EngMetaDataset::decode(root, &mut cx, &MetadataPath::root())?;
    Ok(Parsed { dataset, warnings: cx.warnings })
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let column = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("abc", 0), (1, 1));
        assert_eq!(line_col("a\nbc", 3), (2, 2));
        assert_eq!(line_col("ä\nxy", 5), (2, 3));
    }
}
