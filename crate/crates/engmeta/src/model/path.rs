use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::node::{Kind, Value};
use super::EngMetaDataset;

/// One step of a [`MetadataPath`]: an element name plus an optional
/// zero-based list index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub name: String,
    pub index: Option<usize>,
}

/// Dotted address of an element inside a dataset, e.g.
/// `processingStep[0].software[0].name`.
///
/// A segment without an index addresses every element of a list when
/// reading, and the first element when writing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetadataPath {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid path at offset {offset}: {message}")]
pub struct PathParseError {
    pub offset: usize,
    pub message: String,
}

impl MetadataPath {
    pub fn root() -> Self {
        Self::default()
    }

    /// Parses and checks every segment name against the dataset vocabulary.
    pub fn parse(text: &str) -> Result<Self, PathParseError> {
        let (path, offsets) = Self::parse_syntax(text)?;
        let mut kind = EngMetaDataset::kind();
        for (seg, offset) in path.segments.iter().zip(offsets) {
            let Kind::Record { fields, name } = kind else {
                return Err(PathParseError {
                    offset,
                    message: format!("`{}` is below a scalar value", seg.name),
                });
            };
            let Some(field) = fields().iter().find(|f| f.name == seg.name) else {
                return Err(PathParseError {
                    offset,
                    message: format!("`{}` is not an element of `{name}`", seg.name),
                });
            };
            if seg.index.is_some_and(|i| i > 0) && !field.list {
                return Err(PathParseError {
                    offset,
                    message: format!("`{}` is not repeatable", seg.name),
                });
            }
            kind = (field.kind)();
        }
        Ok(path)
    }

    /// Syntax-only parse; returns the byte offset of each segment.
    pub fn parse_syntax(text: &str) -> Result<(Self, Vec<usize>), PathParseError> {
        let bytes = text.as_bytes();
        let mut segments = Vec::new();
        let mut offsets = Vec::new();
        let mut pos = 0;
        if text.is_empty() {
            return Err(PathParseError { offset: 0, message: "empty path".into() });
        }
        loop {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            if pos == start || !bytes[start].is_ascii_alphabetic() {
                return Err(PathParseError { offset: start, message: "expected element name".into() });
            }
            let name = text[start..pos].to_string();
            let mut index = None;
            if pos < bytes.len() && bytes[pos] == b'[' {
                let open = pos;
                pos += 1;
                let digits = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos == digits || pos >= bytes.len() || bytes[pos] != b']' {
                    return Err(PathParseError { offset: open, message: "expected `[<index>]`".into() });
                }
                index = Some(text[digits..pos].parse::<usize>().map_err(|e| PathParseError {
                    offset: digits,
                    message: e.to_string(),
                })?);
                pos += 1;
            }
            segments.push(Segment { name, index });
            offsets.push(start);
            if pos == bytes.len() {
                break;
            }
            if bytes[pos] != b'.' {
                return Err(PathParseError { offset: pos, message: "expected `.`".into() });
            }
            pos += 1;
        }
        Ok((MetadataPath { segments }, offsets))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn child(&self, name: &str, index: Option<usize>) -> Self {
        let mut segments = self.segments.clone();
        segments.push(Segment { name: name.to_string(), index });
        MetadataPath { segments }
    }

    pub fn parent(&self) -> Option<Self> {
        if self.segments.is_empty() {
            return None;
        }
        let mut segments = self.segments.clone();
        segments.pop();
        Some(MetadataPath { segments })
    }

    pub fn last(&self) -> Option<&Segment> {
        self.segments.last()
    }

    /// Same path with all indices removed, e.g. `processingStep.software.name`.
    pub fn pattern(&self) -> String {
        self.segments.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(".")
    }

    pub(crate) fn segments_mut(&mut self) -> &mut Vec<Segment> {
        &mut self.segments
    }
}

impl fmt::Display for MetadataPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&seg.name)?;
            if let Some(idx) = seg.index {
                write!(f, "[{idx}]")?;
            }
        }
        Ok(())
    }
}

impl FromStr for MetadataPath {
    type Err = PathParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetadataPath::parse(s)
    }
}

impl Serialize for MetadataPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        let p = MetadataPath::parse("processingStep[0].software[0].name").unwrap();
        assert_eq!(p.segments().len(), 3);
        assert_eq!(p.to_string(), "processingStep[0].software[0].name");
        assert_eq!(p.pattern(), "processingStep.software.name");
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(MetadataPath::parse("system..name").unwrap_err().offset, 7);
        assert_eq!(MetadataPath::parse("system.components[x]").unwrap_err().offset, 17);
        assert_eq!(MetadataPath::parse("title[0]x").unwrap_err().offset, 8);
        assert_eq!(MetadataPath::parse("").unwrap_err().offset, 0);
    }

    #[test]
    fn vocabulary_is_checked() {
        let err = MetadataPath::parse("system.nonsense").unwrap_err();
        assert_eq!(err.offset, 7);
        assert!(MetadataPath::parse("project.name").is_err());
        assert!(MetadataPath::parse("system[1]").is_err());
        assert!(MetadataPath::parse("system.temporalResolution.numberOfTimesteps").is_ok());
    }
}
